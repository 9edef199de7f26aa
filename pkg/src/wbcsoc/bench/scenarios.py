"""Named benchmark configurations.

Every scenario carries its own domain, initial data, bottom, boundary data,
final time and default resolution. ``run_scenario`` builds the grid and
solver, marches to the output times and returns the snapshots.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..grids import DIRICHLET, BoundarySpec, ConfigurationError, SideCondition, build_grids, cell_averages
from ..integrator import SchemeConfig, advance_to, make_solver
from ..swe_model import Bathymetry, ModelParams

TIDAL_LENGTH = 14000.0
TIDAL_PERIOD = 86400.0


@dataclass(frozen=True)
class Scenario:
    name: str
    dim: int
    domain: tuple
    initial: object
    bathymetry: Bathymetry
    boundary: BoundarySpec
    t_final: float
    n_cells: object
    cfl: float = 0.4
    params: ModelParams = ModelParams()
    scheme: SchemeConfig = SchemeConfig()
    output_times: tuple = ()
    reference_cells: object = None
    description: str = ""

    @property
    def measure(self):
        if self.dim == 1:
            return self.domain[1] - self.domain[0]
        (a, b), (c, d) = self.domain
        return (b - a) * (d - c)

    def make_grid(self, n_cells=None):
        n = self.n_cells if n_cells is None else n_cells
        return build_grids(self.domain, n)

    def with_overrides(self, **changes):
        """Copy with scheme/params fields replaced where ``changes`` names them."""
        scheme_keys = SchemeConfig.__dataclass_fields__.keys()
        param_keys = ModelParams.__dataclass_fields__.keys()
        scheme = replace(self.scheme, **{k: v for k, v in changes.items() if k in scheme_keys})
        params = replace(self.params, **{k: v for k, v in changes.items() if k in param_keys})
        rest = {k: v for k, v in changes.items() if k not in scheme_keys and k not in param_keys}
        return replace(self, scheme=scheme, params=params, **rest)


@dataclass
class ScenarioRun:
    scenario: Scenario
    grid: object
    solver: object
    initial: object
    snapshots: dict
    log: list = field(default_factory=list)
    net_boundary_inflow: float = 0.0

    @property
    def final(self):
        return self.snapshots[max(self.snapshots)]


def run_scenario(scenario, n_cells=None, t_final=None, observer=None, **overrides):
    """Run ``scenario`` (name or :class:`Scenario`) and collect output snapshots."""
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    if overrides:
        scenario = scenario.with_overrides(**overrides)
    grid = scenario.make_grid(n_cells)
    solver = make_solver(grid, scenario.bathymetry, scenario.boundary, scenario.params, scenario.scheme)
    u0 = solver.fill(cell_averages(scenario.initial, grid), 0.0)
    t_end = scenario.t_final if t_final is None else float(t_final)
    times = tuple(t for t in scenario.output_times if t < t_end) + (t_end,)
    result = advance_to(solver, u0, t_end, cfl=scenario.cfl, snapshot_times=times, observer=observer)
    return ScenarioRun(scenario, grid, solver, u0, result.snapshots, result.log, result.net_boundary_inflow)


# ---------------------------------------------------------------- bottoms

def _indicator(x, a, b):
    return (x >= a) & (x <= b)


def gaussian_bump():
    return Bathymetry(lambda x: 5.0 * np.exp(-0.4 * (x - 5.0) ** 2), name="gaussian-bump")


def step_bottom():
    return Bathymetry(lambda x: np.where(_indicator(x, 4.0, 8.0), 4.0, 0.0), jumps=(4.0, 8.0), name="step")


def sine_squared():
    return Bathymetry(lambda x: np.sin(np.pi * x) ** 2, name="sin-squared")


def tidal_bottom():
    L = TIDAL_LENGTH
    return Bathymetry(lambda x: 10.0 + 40.0 * x / L + 10.0 * np.sin(4.0 * np.pi * x / L - 0.5 * np.pi),
                      name="tidal")


def cosine_hump():
    return Bathymetry(lambda x: np.where(_indicator(x, 1.4, 1.6), 0.25 * (np.cos(10.0 * np.pi * (x - 1.5)) + 1.0), 0.0),
                      name="cosine-hump")


def rectangular_bump():
    return Bathymetry(lambda x: np.where(_indicator(x, 562.5, 937.5), 8.0, 0.0), jumps=(562.5, 937.5),
                      name="rectangular-bump")


def parabolic_hump():
    return Bathymetry(lambda x: np.where(_indicator(x, 8.0, 12.0), 0.2 - 0.05 * (x - 10.0) ** 2, 0.0),
                      name="parabolic-hump")


def gaussian_2d():
    return Bathymetry(lambda x, y: 0.8 * np.exp(-50.0 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)), name="gaussian-2d")


def elongated_hump_2d():
    return Bathymetry(lambda x, y: 0.8 * np.exp(-5.0 * (x - 0.9) ** 2 - 50.0 * (y - 0.5) ** 2),
                      name="elongated-hump-2d")


# ---------------------------------------------------------------- reference formulas

def tidal_surface(t):
    return 64.5 - 4.0 * math.sin(4.0 * math.pi * t / TIDAL_PERIOD + 0.5 * math.pi)


def tidal_exact(x, t):
    """Asymptotic tidal solution ``(w, hu)``."""
    phase = 4.0 * math.pi * t / TIDAL_PERIOD + 0.5 * math.pi
    x = np.asarray(x, dtype=float)
    return (np.full_like(x, 64.5 - 4.0 * math.sin(phase)),
            math.pi * (x - TIDAL_LENGTH) / 5400.0 * math.cos(phase))


# ---------------------------------------------------------------- catalog

def _lake(level, dim=1):
    if dim == 1:
        return lambda x: (np.full_like(x, level), np.zeros_like(x))
    return lambda x, y: (np.full_like(x, level), np.zeros_like(x), np.zeros_like(x))


def _perturbation(eps):
    return lambda x: (np.where(_indicator(x, 1.1, 1.2), 1.0 + eps, 1.0), np.zeros_like(x))


def _accuracy_initial(x):
    c = np.cos(2.0 * np.pi * x)
    return 5.5 - 0.5 * c + np.exp(c), np.sin(c)


def _dam(x):
    return np.where(x <= 750.0, 20.0, 15.0), np.zeros_like(x)


def _perturbation_2d(x, y):
    return np.where(_indicator(x, 0.05, 0.15), 1.01, 1.0), np.zeros_like(x), np.zeros_like(x)


def _dirichlet(*values):
    return SideCondition(DIRICHLET, tuple(values))


def _hump_boundary(discharge, level):
    return BoundarySpec(_dirichlet(None, discharge), _dirichlet(level, None))


def _detector(length):
    """Scale the second-difference threshold to the domain length."""
    return SchemeConfig(detector_threshold=1.0 / length)


def _build_catalog():
    absorbing = BoundarySpec.absorbing()
    cat = {}

    def add(s):
        cat[s.name] = s

    add(Scenario("wb-1d-smooth", 1, (0.0, 10.0), _lake(10.0), gaussian_bump(), absorbing, 10.0, 200,
                 scheme=_detector(10.0), description="lake at rest over a Gaussian bump"))
    add(Scenario("wb-1d-step", 1, (0.0, 10.0), _lake(10.0), step_bottom(), absorbing, 10.0, 200,
                 scheme=_detector(10.0), description="lake at rest over a step"))
    add(Scenario("accuracy-1d", 1, (0.0, 1.0), _accuracy_initial, sine_squared(), BoundarySpec.periodic(),
                 0.1, 400, scheme=_detector(1.0), description="smooth periodic flow for order studies"))
    tidal_bc = BoundarySpec(_dirichlet(tidal_surface, None), _dirichlet(None, 0.0))
    add(Scenario("tidal", 1, (0.0, TIDAL_LENGTH), _lake(60.5), tidal_bottom(), tidal_bc, 7552.13, 200,
                 scheme=_detector(TIDAL_LENGTH), reference_cells=3000,
                 description="tidal wave over a sinusoidal slope"))
    add(Scenario("perturbation", 1, (0.0, 2.0), _perturbation(0.001), cosine_hump(), absorbing, 0.2, 200,
                 scheme=_detector(2.0), reference_cells=3000, description="small surface pulse, eps=0.001"))
    add(Scenario("perturbation-large", 1, (0.0, 2.0), _perturbation(0.2), cosine_hump(), absorbing, 0.2, 200,
                 scheme=_detector(2.0), reference_cells=3000, description="large surface pulse, eps=0.2"))
    add(Scenario("dam-break", 1, (0.0, 1500.0), _dam, rectangular_bump(), absorbing, 55.0, 500,
                 scheme=_detector(1500.0), output_times=(15.0, 55.0), reference_cells=5000,
                 description="dam break over a rectangular bump"))
    add(Scenario("dam-break-friction", 1, (0.0, 1500.0), _dam, rectangular_bump(), absorbing, 55.0, 500,
                 params=ModelParams(manning=0.1), scheme=_detector(1500.0), output_times=(15.0, 55.0),
                 reference_cells=5000, description="dam break with Manning friction M=0.1"))
    for name, q, level, n, ref in (("hump-subcritical", 4.42, 2.0, 100, 1000),
                                   ("hump-transcritical", 1.53, 0.41, 200, 2000),
                                   ("hump-shock", 0.18, 0.33, 100, 1000)):
        add(Scenario(name, 1, (0.0, 25.0), lambda x: (np.full_like(x, 0.5), np.zeros_like(x)), parabolic_hump(),
                     _hump_boundary(q, level), 200.0, n, scheme=_detector(25.0), reference_cells=ref,
                     description=f"steady flow over a hump, hu(0)={q}, w(25)={level}"))
    add(Scenario("wb-2d", 2, ((0.0, 1.0), (0.0, 1.0)), _lake(1.0, 2), gaussian_2d(), BoundarySpec.absorbing(2),
                 0.1, (100, 100), cfl=0.45, scheme=_detector(1.0), description="2-D lake at rest"))
    add(Scenario("perturbation-2d", 2, ((0.0, 2.0), (0.0, 1.0)), _perturbation_2d, elongated_hump_2d(),
                 BoundarySpec.absorbing(2), 0.6, (200, 100), cfl=0.45, scheme=_detector(2.0),
                 output_times=(0.12, 0.24, 0.36, 0.48, 0.6), reference_cells=(600, 300),
                 description="planar pulse crossing an elongated hump"))
    return cat


CATALOG = _build_catalog()


def scenario_names():
    return sorted(CATALOG)


def get_scenario(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigurationError(f"unknown scenario {name!r}; choose from {', '.join(scenario_names())}") from None
