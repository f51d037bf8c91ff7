"""
Experiment Presets

Named grids reproducing the published experiments. Defaults: alpha = 1,
rho_t = 1 + n(t)/t, gap 0.5, 1000 instances per cell; every field can be
overridden.
"""

import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .bair import ceil_count
from .exceptions import ConfigurationError
from .harness import ALGORITHMS, ExperimentCell

STANDARD_KS = (2, 5, 20, 100)

# N1 choices of the Phase-1 budget sweep: label -> budget(K, delta, alpha)
N1_CHOICES = {
    "(2K/delta)^(1/alpha)": lambda k, delta, alpha: (2.0 * k / delta) ** (1.0 / alpha),
    "(sqrtK/delta)^(1/alpha)": lambda k, delta, alpha: (math.sqrt(k) / delta) ** (1.0 / alpha),
    "(logK/delta)^(1/alpha)": lambda k, delta, alpha: (math.log(k) / delta) ** (1.0 / alpha),
    "K": lambda k, delta, alpha: float(k),
}


@dataclass(frozen=True)
class Preset:
    """
    A grid of cells sharing user and algorithm settings.

    Attributes:
        name: Preset name used on the command line
        title: Caption of the reproduced table
        deltas: Confidence parameters, one row group each
        ks: Numbers of arms
        algorithms: Policies compared
        alpha: User exploration tendency
        gap: Top gap of generated instances
        noise_p: User click noise (m follows default_m)
        shared_phase1: Run the shared-Phase-1 ablation
        n1_sweep: One cell per N1 choice, BAIR only
    """

    name: str
    title: str
    deltas: Tuple[float, ...]
    ks: Tuple[int, ...] = STANDARD_KS
    algorithms: Tuple[str, ...] = ALGORITHMS
    alpha: float = 1.0
    gap: float = 0.5
    noise_p: float = 0.0
    shared_phase1: bool = False
    n1_sweep: bool = False

    @property
    def layout(self) -> str:
        return "n1_sweep" if self.n1_sweep else "comparison"


PRESETS: Dict[str, Preset] = {
    preset.name: preset
    for preset in (
        Preset("table2", "Comparison between BAIR and three baselines", (0.1, 0.05, 0.02, 0.01, 0.005)),
        Preset("table3", "Extended user model with click noise p=0.1", (0.1, 0.05), noise_p=0.1),
        Preset("table4", "Baselines with shared Phase-1", (0.02, 0.01), shared_phase1=True),
        Preset(
            "table7", "Different choices of N1 at alpha=0.8", (0.1, 0.01),
            ks=(20, 100), algorithms=("bair",), alpha=0.8, n1_sweep=True,
        ),
        Preset("alpha-high", "Comparison at alpha=2", (0.1, 0.05, 0.02, 0.01), alpha=2.0),
        Preset("alpha-low", "Comparison at alpha=0.8", (0.1, 0.05, 0.02, 0.01), alpha=0.8),
        Preset("small-gap", "Comparison at gap 0.2", (0.1, 0.05, 0.02, 0.01, 0.005), gap=0.2),
    )
}

# Preset fields a caller may override, besides the per-cell fields of ExperimentCell.
PRESET_OVERRIDES = ("deltas", "ks", "algorithms", "alpha", "gap", "noise_p")


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


def build_cells(preset: Preset, overrides: Optional[Dict[str, Any]] = None) -> List[ExperimentCell]:
    """
    Expand a preset into experiment cells.

    Args:
        preset: Grid definition
        overrides: Values replacing preset fields (PRESET_OVERRIDES) or
            passed through to every ExperimentCell (replications,
            master_seed, rho_policy, n1_override, m_override, ...)

    Returns:
        Cells ordered by delta (descending as listed), then K
    """
    overrides = dict(overrides or {})
    grid = {key: overrides.pop(key) for key in PRESET_OVERRIDES if key in overrides}
    if grid:
        grid = {key: tuple(value) if key in ("deltas", "ks", "algorithms") else value for key, value in grid.items()}
        preset = replace(preset, **grid)

    cells = []
    for delta in preset.deltas:
        for k in preset.ks:
            base = dict(
                delta=delta,
                n_arms=k,
                gap=preset.gap,
                alpha=preset.alpha,
                noise_p=preset.noise_p,
                algorithms=preset.algorithms,
                shared_phase1=preset.shared_phase1,
            )
            base.update(overrides)
            if preset.n1_sweep and "n1_override" not in overrides:
                for label, budget in N1_CHOICES.items():
                    n1 = max(1, ceil_count(budget(k, delta, preset.alpha)))
                    cells.append(ExperimentCell(**base, n1_override=n1, label=label))
            else:
                cells.append(ExperimentCell(**base))
    return cells


def preset_names() -> Sequence[str]:
    return tuple(PRESETS)
