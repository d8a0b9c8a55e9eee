"""Penalized regression with network cohesion.

Per-node individual effects smoothed by a graph-Laplacian penalty plus
shared covariate coefficients, for linear, logistic and Cox models, with
sparse solvers, spectral sparsification, out-of-sample prediction,
cross-validation, theory-bound evaluators and a simulation harness.
"""

__version__ = "0.1.0"

from .exceptions import DataError, EstimatorNotExistError, NetcohError
from .graph import (Graph, LaplacianMatrix, cohesion_gradient,
                    cohesion_penalty, connected_components, from_edge_list,
                    induced_subgraph, laplacian, read_edge_list,
                    split_for_prediction, write_edge_list)
from .solvers import (RNCSystem, SolveReport, block_eliminate_fit,
                      block_eliminate_weighted, dense_solve_oracle, pcg_solve,
                      standardize)
from .linear import (LinearFit, fit_linear, fitted_values, null_model_fit,
                     ols_fit, predict_response)
from .glm import (GlmFit, SurvivalData, cox_baseline_fit, cox_partial_loglik,
                  fit_cox, fit_logistic, logistic_baseline_fit,
                  logistic_predict_prob, ppl_metric)
from .theory import (TheoryReport, assumption_nu, ols_comparison,
                     ols_exact_mse, rnc_bias, rnc_exact_mse,
                     sparsification_bound, theorem1_bounds, theory_report)
from .sparsify import (SparsifyResult, effective_resistances,
                       spectral_sparsify, verify_spectral_approx)
from .selection import (CVReport, forward_selection, kfold_cv, mspe,
                        predict_new_nodes, relative_improvement)
from .simulate import (SimConfig, dense_block_graph, er_components_generate,
                       gen_data, run_experiment, sbm_generate,
                       sparsification_experiment)

__all__ = [
    "__version__",
    "NetcohError", "DataError", "EstimatorNotExistError",
    "Graph", "LaplacianMatrix", "from_edge_list", "read_edge_list",
    "write_edge_list", "laplacian", "cohesion_penalty", "cohesion_gradient",
    "connected_components", "split_for_prediction", "induced_subgraph",
    "RNCSystem", "SolveReport", "pcg_solve", "block_eliminate_fit",
    "block_eliminate_weighted", "dense_solve_oracle", "standardize",
    "LinearFit", "fit_linear", "ols_fit", "null_model_fit", "fitted_values",
    "predict_response",
    "GlmFit", "SurvivalData", "fit_logistic", "fit_cox",
    "logistic_baseline_fit", "cox_baseline_fit", "logistic_predict_prob",
    "cox_partial_loglik", "ppl_metric",
    "TheoryReport", "assumption_nu", "rnc_bias", "rnc_exact_mse",
    "ols_exact_mse", "theorem1_bounds", "theory_report", "ols_comparison",
    "sparsification_bound",
    "SparsifyResult", "effective_resistances", "spectral_sparsify",
    "verify_spectral_approx",
    "CVReport", "kfold_cv", "predict_new_nodes", "mspe",
    "relative_improvement", "forward_selection",
    "SimConfig", "sbm_generate", "er_components_generate",
    "dense_block_graph", "gen_data", "run_experiment",
    "sparsification_experiment",
]
