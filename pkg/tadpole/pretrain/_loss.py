from ..tensor import ShapeError, Tensor, gather_rows, mean
from ._mask import MaskPlan


def masked_mse(
    original_patches: Tensor, recon_patches: Tensor, plan: MaskPlan
) -> Tensor:
    """Mean squared error over the masked rows only.

    Normalized by `num_masked * patch_dim`. Visible rows get exactly zero
    gradient.
    """
    if original_patches.shape != recon_patches.shape:
        raise ShapeError(
            f"masked_mse: original {original_patches.shape} and "
            f"reconstruction {recon_patches.shape} differ"
        )
    if original_patches.shape[0] != plan.n:
        raise ShapeError(
            f"masked_mse: {original_patches.shape[0]} rows for a plan over {plan.n}"
        )
    diff = gather_rows(recon_patches, plan.masked_indices) - gather_rows(
        original_patches, plan.masked_indices
    )
    return mean(diff * diff)
