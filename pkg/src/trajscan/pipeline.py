"""End-to-end scan: validate a configuration, sample, reduce, scan, and re-score on the full data."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .coreset import CoresetMethod
from .discrepancy import DiscrepancyFn, Family, Model, RegionStats, check_model_fn, evaluate_trajectories
from .errors import ConfigError
from .sampling import SamplingParams, draw_indices, draw_two_level, net_size, sample_size
from .scan_full import MultiScaleParams, max_disk_full, max_disk_multiscale, max_halfplane_full, max_rect_full
from .scan_point import ScanResult, disk_scan, flux_reduce, halfplane_scan, partial_reduce, rect_scan
from .trajectory import TrajectoryDataset

DEFAULT_CORESET = {Family.HALFPLANE: "hull", Family.DISK: "grid_kernel", Family.RECT: "gridding"}


@dataclass
class ScanConfig:
    """Every knob of a scan run. Distances are in normalized units."""

    model: Model = Model.FULL
    family: Family = Family.DISK
    fn: DiscrepancyFn = field(default_factory=DiscrepancyFn)
    eps: float = 0.1
    delta: float = 0.05
    alpha: Optional[float] = None
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    z: Optional[int] = None
    coreset: Optional[str] = None
    max_side: Optional[float] = None
    seed: int = 0
    exact_eval: bool = False
    hull_trick: bool = True
    c_net: float = 1.0
    c_sample: float = 0.25
    adapt_k: bool = True
    partial_method: str = "even"

    def __post_init__(self):
        self.model = Model(self.model)
        self.family = Family(self.family)
        check_model_fn(self.model, self.fn)
        if self.alpha is not None and not (0 < self.alpha < 1):
            raise ConfigError("alpha must be in (0, 1)")
        if self.r_min is not None and self.r_max is None and self.z is not None:
            self.r_max = self.r_min * 2**self.z
        if self.r_min is not None and self.r_max is not None and self.r_min >= self.r_max:
            raise ConfigError("r_min must be below r_max")
        if self.model is Model.FULL and self.family is Family.DISK and self.coreset_tag() == "grid_kernel":
            if self.r_min is None or self.r_max is None:
                raise ConfigError("full-model disk scanning with grid_kernel needs an r window (--r-min and --r-max or --z)")
            if self.alpha is None:
                raise ConfigError("grid_kernel needs --alpha")
        if self.model is Model.FULL and self.family is Family.RECT and self.alpha is None:
            raise ConfigError("full-model rectangle scanning needs --alpha")
        if self.max_side is not None and self.max_side < 0:
            raise ConfigError("max_side must be nonnegative")
        if self.partial_method not in ("even", "random"):
            raise ConfigError("partial sampling method must be 'even' or 'random'")
        self.sampling()
        if self.model is Model.FULL:
            self.coreset_method(self.r_min)

    def coreset_tag(self) -> str:
        return self.coreset or DEFAULT_CORESET[self.family]

    def sampling(self) -> SamplingParams:
        return SamplingParams(self.eps, self.delta, 1, self.c_net, self.c_sample, self.seed, self.adapt_k)

    def coreset_method(self, r: Optional[float] = None) -> CoresetMethod:
        return CoresetMethod(self.coreset_tag(), self.alpha, r)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        d["family"] = self.family.value
        d["fn"] = {"name": self.fn.name, "one_sided": self.fn.one_sided}
        return d


@dataclass
class ScanOutcome:
    """Scanner result plus the same shape scored exactly on every trajectory."""

    result: ScanResult
    full_stats: Optional[RegionStats]
    n: int
    s: int
    n_k: int
    s_k: int


def _multiscale_params(cfg: ScanConfig) -> MultiScaleParams:
    z = cfg.z
    if z is None:
        # smallest doubling window that covers [r_min, r_max]
        z = max(1, math.ceil(math.log2(cfg.r_max / cfg.r_min) - 1e-9))
    return MultiScaleParams(cfg.r_min, cfg.r_min * 2**z, cfg.alpha, cfg.hull_trick, cfg.max_side)


def run_scan(dataset: TrajectoryDataset, cfg: ScanConfig) -> ScanOutcome:
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    model, family, fn = cfg.model, cfg.family, cfg.fn
    sp = cfg.sampling()
    if model is Model.FLUX:
        n_idx, s_idx = draw_indices(len(dataset), net_size(sp), sample_size(sp), cfg.seed)
        net, sample = flux_reduce(dataset, n_idx), flux_reduce(dataset, s_idx)
        n, s = len(n_idx), len(s_idx)
    elif model is Model.PARTIAL:
        n, s = net_size(sp), sample_size(sp)
        net, sample = partial_reduce(dataset, n, s, cfg.partial_method, cfg.seed)
    else:
        net = sample = None
    if model is not Model.FULL:
        if family is Family.HALFPLANE:
            res = halfplane_scan(net, sample, fn, model, True)
        elif family is Family.DISK:
            res = disk_scan(net, sample, fn, model, True, cfg.r_min, cfg.r_max)
        else:
            res = rect_scan(net, sample, fn, model, True, max_side=cfg.max_side)
        n_k, s_k = len(net), len(sample)
    elif family is Family.DISK and cfg.coreset_tag() == "grid_kernel":
        params = _multiscale_params(cfg)
        res = max_disk_multiscale(dataset, params, sp, fn, exact_eval=cfg.exact_eval)
        subs = res.params.get("subranges", [])
        n, s, n_k, s_k = (max((d[key] for d in subs), default=0) for key in ("n", "s", "n_k", "s_k"))
    else:
        tl = draw_two_level(dataset, sp, cfg.coreset_method(cfg.r_min))
        net, sample = tl.net_points, tl.sample_points
        if family is Family.HALFPLANE:
            res = max_halfplane_full(net, sample, fn)
        elif family is Family.DISK:
            res = max_disk_full(net, sample, fn, cfg.r_min, cfg.r_max, cfg.hull_trick)
        else:
            res = max_rect_full(net, sample, fn, cfg.alpha, cfg.max_side, cfg.eps)
        n, s, n_k, s_k = tl.n, tl.s, tl.n_k, tl.s_k
    full = evaluate_trajectories(res.shape, dataset, model, fn) if res.shape is not None else None
    return ScanOutcome(res, full, int(n), int(s), int(n_k), int(s_k))
