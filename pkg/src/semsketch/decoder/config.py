from __future__ import annotations

from dataclasses import dataclass

FLOW_ESTIMATORS = ("zero", "block-matching")
OCCLUSION_ESTIMATORS = ("sketch-disagreement", "constant-one")
BORDER_POLICIES = ("clamp", "zero")


@dataclass(frozen=True)
class DecoderConfig:
    """Parameters of the reference decoder.

    ``window`` is the number of past generated frames handed to the flow and
    occlusion estimators; ``alpha`` sharpens the attention softmax.
    """

    window: int = 1
    alpha: float = 100.0
    feature_scale: int = 4
    flow_estimator: str = "block-matching"
    occlusion_estimator: str = "sketch-disagreement"
    border_policy: str = "clamp"
    block_size: int = 8
    search_radius: int = 4
    dilation_radius: int = 2
    edge_darkening: float = 0.3

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.feature_scale < 1:
            raise ValueError("feature_scale must be at least 1")
        if self.flow_estimator not in FLOW_ESTIMATORS:
            raise ValueError(f"flow_estimator must be one of {FLOW_ESTIMATORS}")
        if self.occlusion_estimator not in OCCLUSION_ESTIMATORS:
            raise ValueError(f"occlusion_estimator must be one of {OCCLUSION_ESTIMATORS}")
        if self.border_policy not in BORDER_POLICIES:
            raise ValueError(f"border_policy must be one of {BORDER_POLICIES}")
        if self.block_size < 1 or self.search_radius < 0 or self.dilation_radius < 0:
            raise ValueError("block_size must be positive and radii non-negative")
        if not 0.0 <= self.edge_darkening <= 1.0:
            raise ValueError("edge_darkening must lie in [0, 1]")
