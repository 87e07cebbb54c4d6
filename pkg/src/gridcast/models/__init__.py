"""Model zoo: linear, trees, forests, boosting, splines, neural nets."""
from .base import (HYPERPARAM_DEFAULTS, MODEL_FAMILIES, FittedModel,
                   LinearModel, ModelSpec, fit, load_model, predict,
                   save_model)
from .forest import Forest, fit_forest
from .gam import GAMModel, bspline_basis, fit_gam, make_knots
from .gbt import BoostedTrees, fit_gbt
from .neural import (CNNModel, MLPModel, cnn_forward, cnn_init,
                     cnn_loss_grads, fit_cnn, fit_mlp, gradient_check,
                     mlp_forward, mlp_init, mlp_loss_grads)
from .tree import LEAF_KINDS, Tree, grow_tree

__all__ = [
    "HYPERPARAM_DEFAULTS", "MODEL_FAMILIES", "FittedModel", "LinearModel",
    "ModelSpec", "fit", "load_model", "predict", "save_model",
    "Forest", "fit_forest",
    "GAMModel", "bspline_basis", "fit_gam", "make_knots",
    "BoostedTrees", "fit_gbt",
    "CNNModel", "MLPModel", "cnn_forward", "cnn_init", "cnn_loss_grads",
    "fit_cnn", "fit_mlp", "gradient_check", "mlp_forward", "mlp_init",
    "mlp_loss_grads",
    "LEAF_KINDS", "Tree", "grow_tree",
]
