"""Kernel SVM training with an exact cardinality constraint on the input features."""
from .baselines import rfe
from .dataset import Dataset, load_bundled, load_csv, load_sparse, standardize, subsample
from .decomposition import dec_sub_light, naive_alternation
from .errors import DomainError, FormatError
from .kernels import FeatureMask, KernelSpec, build_q, homogenize, kernel_eval, masked_kernel_eval
from .local_search import LsConfig, TabuList, ls, ls_star, n1_neighbors, sample_n2
from .problem import Incumbent, ProblemSpec, brute_force_minlp, evaluate_f, solve_for_mask
from .smo import DualSolution, SvmModel, compute_bias, predict, solve_dual
from .submodular import (SetFunctionContext, certify_h_submodular, certify_supermodular, f_value,
                         h_value, lambda_value, lazy_greedy_max, simple_greedy_max,
                         solve_beta_subproblem)

__version__ = "0.1.0"
