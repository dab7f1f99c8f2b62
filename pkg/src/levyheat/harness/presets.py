"""Built-in experiment presets (INI text, parsed like any user config)."""

from __future__ import annotations

from .config import ExperimentConfig, parse_config

PRESETS = {
    "cauchy-d1": """\
[measure]
family = pure_stable
alpha = 1

[sweep]
t_list = 0.1, 1, 10
x_extent_h = 10

[checks]
density.cauchy_oracle = scale=1
density.sweep =
density.split_oracle =
density.split_scan = k_max=4
symbol.psi_sandwich =
symbol.fourier_moments =
symbol.h_ratio_decay =
measure.profile_bound =
measure.tech_assumption =
measure.lower_measure_bound =

[output]
formats = csv, report, plotdata
""",
    "stablelog-short": """\
[measure]
family = stable_log
alpha = 1.2
kappa = 1
beta = 0.5

[sweep]
t_range = 1e-2, 1e2
points_per_decade = 2
x_extent = 100

[checks]
measure.profile_bound =
measure.tech_assumption =
measure.lower_measure_bound =
symbol.psi_sandwich =
symbol.fourier_moments =
symbol.doubling = moment_band=20
symbol.h_ratio_decay =
density.sweep =
density.fd_derivative =
density.split_oracle =
density.small_jump_envelope =
bounds.upper_main =
bounds.lower =
bounds.derivative_main = t_lo=0.1, t_hi=10, t_points=5
bounds.two_sided = t_list=0.01 0.1 1 10 100
bounds.stablelog_short =

[output]
formats = csv, report, plotdata
""",
    "stablelog-large": """\
[measure]
family = stable_log
alpha = 1.2
kappa = 1
beta = 0.5

[sweep]
t_range = 1, 1e2
points_per_decade = 2
x_extent = 100

[checks]
symbol.psi_sandwich =
symbol.h_ratio_decay =
density.sweep =
bounds.stablelog_large =
bounds.two_sided =
bounds.upper_main =

[output]
formats = csv, report, plotdata
""",
    "tempered": """\
[measure]
family = tempered_poly
alpha = 1
kappa = 0.5
beta = 1
m = 1

[sweep]
t_range = 0.1, 10
points_per_decade = 2
x_extent = 50
derivatives = 0, 1
alias_rtol = 1e-13
alias_reference = peak

[checks]
measure.profile_bound =
measure.tech_assumption =
measure.lower_measure_bound =
symbol.psi_sandwich =
symbol.fourier_moments =
symbol.doubling =
symbol.h_ratio_decay =
density.sweep =
density.split_oracle = refine=4
bounds.upper_main =
bounds.tempered_deriv =

[output]
formats = csv, report, plotdata
""",
    "dyadic": """\
[measure]
family = dyadic
beta = 1
kappa = 1

[sweep]
t_range = 1e-2, 1e2
points_per_decade = 2
x_extent = 100
center = none
alias_rtol = 1e-6
alias_reference = peak

[checks]
measure.profile_bound =
measure.tech_assumption =
measure.lower_measure_bound =
symbol.psi_sandwich =
symbol.fourier_moments =
symbol.doubling =
symbol.h_ratio_decay =
symbol.dyadic_scaling = kappas=2
density.sweep =
density.split_oracle =
density.convolution_powers =
bounds.discrete_dyadic =
bounds.lower = floor=1e-5

[output]
formats = csv, report, plotdata
""",
}


def preset_text(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name), f"<preset {name}>")
