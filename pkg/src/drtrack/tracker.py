"""Online tracking: multi-scale localization and sparse joint model updates."""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateRegion
from .features import RegionSpec, apply_window, extract_features
from .fourier import fft2, ifft2
from .labels import assemble_reliability, make_gaussian_label, make_patch_masks
from .learning import LearnConfig, joint_learn
from .memory import SampleMemory, learning_rate


@dataclass
class TrackConfig:
    scales: int = 5
    scale_step: float = 1.02
    update_interval: int = 5
    cell_size: int = 4
    padding: float = 4.0
    grid: tuple = (3, 3)
    capacity: int = 50
    lr_early: float = 0.011
    lr_late: float = 0.02
    early_frames: int = 10
    first_cg_iters: int = 80
    first_alternations: int = 4
    min_target_cells: int = 4
    max_target_cells: int = 10
    learn: LearnConfig = field(default_factory=lambda: LearnConfig(cg_iters=20, alternations=2))

    def __post_init__(self):
        if self.scales < 1 or self.scales % 2 == 0:
            raise ValueError("number of scales must be odd")
        if self.scale_step <= 1:
            raise ValueError("scale_step must be > 1")
        if self.update_interval < 1:
            raise ValueError("update_interval must be >= 1")
        if self.min_target_cells < 3 or self.max_target_cells < self.min_target_cells:
            raise ValueError("target cell bounds must satisfy 3 <= min <= max")

    def scale_factors(self):
        k = np.arange(self.scales) - self.scales // 2
        return self.scale_step ** k


ABLATIONS = ("baseline", "lrc", "full")


def ablation_config(name, cfg=None):
    """Variant of ``cfg``: plain masked filter, plus consistency term, or full model."""
    cfg = cfg or TrackConfig()
    if name == "baseline":
        learn = replace(cfg.learn, eta=0.0, learn_beta=False)
    elif name == "lrc":
        learn = replace(cfg.learn, eta=cfg.learn.eta or 1.0, learn_beta=False)
    elif name == "full":
        learn = replace(cfg.learn, eta=cfg.learn.eta or 1.0, learn_beta=True)
    else:
        raise ValueError(f"unknown ablation {name!r}; expected one of {ABLATIONS}")
    return replace(cfg, learn=learn)


@dataclass
class TrackerState:
    center: np.ndarray
    target_size: np.ndarray
    scale: float
    h: np.ndarray
    reliability: object
    memory: SampleMemory
    frame_index: int
    config: TrackConfig
    model_size: np.ndarray
    resolution: float
    label: np.ndarray
    masks: object
    last_peak: float = 0.0

    def box(self):
        w, h = self.target_size * self.scale
        return np.array([self.center[0] - w / 2, self.center[1] - h / 2, w, h])

    def effective_filter(self):
        return self.reliability.apply(self.h)


def _region(state, scale):
    return RegionSpec(tuple(state.center), tuple(state.model_size),
                      state.config.padding, state.resolution * scale)


def _sample(state, frame, scale):
    return apply_window(extract_features(frame, _region(state, scale), state.config.cell_size))


def init(first_frame, gt_box, cfg=None):
    """Learn the first model from ``gt_box`` = (x, y, w, h), 0-based pixels."""
    cfg = cfg or TrackConfig()
    frame = np.asarray(first_frame)
    x, y, w, h = (float(v) for v in gt_box)
    cx, cy = x + w / 2, y + h / 2
    rows, cols = frame.shape[:2]
    if w < 1 or h < 1 or not (0 <= cx < cols and 0 <= cy < rows):
        raise DegenerateRegion(f"box {gt_box} is empty or outside the {cols}x{rows} frame")

    # pick the sampling resolution so the target spans a bounded number of cells
    cells = np.array([w, h]) / cfg.cell_size
    if cells.max() > cfg.max_target_cells:
        res = cells.max() / cfg.max_target_cells
    elif cells.min() < cfg.min_target_cells:
        res = cells.min() / cfg.min_target_cells
    else:
        res = 1.0
    model_size = np.array([w, h]) / res

    region = RegionSpec((cx, cy), tuple(model_size), cfg.padding, res)
    H, W = region.grid_cells(cfg.cell_size)
    tgt_h = max(3, int(round(model_size[1] / cfg.cell_size)))
    tgt_w = max(3, int(round(model_size[0] / cfg.cell_size)))
    masks = make_patch_masks(H, W, min(tgt_h, H), min(tgt_w, W), cfg.grid)
    label = make_gaussian_label(H, W, tgt_h, tgt_w)

    memory = SampleMemory(cfg.capacity)
    state = TrackerState(
        center=np.array([cx, cy]), target_size=np.array([w, h]), scale=1.0,
        h=np.zeros((1, H, W)), reliability=None, memory=memory, frame_index=1,
        config=cfg, model_size=model_size, resolution=res, label=label, masks=masks)
    x0 = _sample(state, frame, 1.0)
    memory.insert(x0, learning_rate(1, cfg.lr_early, cfg.lr_late, cfg.early_frames))

    first = replace(cfg.learn, cg_iters=cfg.first_cg_iters, alternations=cfg.first_alternations)
    hf, beta = joint_learn(memory.training_set(label), masks, None, np.ones(masks.M), first)
    state.h = hf
    state.reliability = assemble_reliability(beta, masks, cfg.learn.theta_min, cfg.learn.theta_max)
    return state


def _subcell_peak(resp, i, j):
    """Offset of the maximum of a quadratic fitted to the 3x3 neighbourhood."""
    H, W = resp.shape
    nb = resp[np.ix_([(i - 1) % H, i, (i + 1) % H], [(j - 1) % W, j, (j + 1) % W])]
    # least-squares fit of a + b x + c y + d x^2 + e xy + f y^2 on the 3x3 stencil
    dy, dx = np.mgrid[-1:2, -1:2]
    dx, dy = dx.ravel(), dy.ravel()
    basis = np.column_stack([np.ones(9), dx, dy, dx * dx, dx * dy, dy * dy])
    a, b, c, d, e, f = np.linalg.lstsq(basis, nb.ravel(), rcond=None)[0]
    hess = np.array([[2 * d, e], [e, 2 * f]])
    if np.linalg.det(hess) > 0 and hess[0, 0] < 0:
        ox, oy = np.linalg.solve(hess, [-b, -c])
    else:
        ox = 0.0 if d >= 0 else -b / (2 * d)
        oy = 0.0 if f >= 0 else -c / (2 * f)
    return float(np.clip(oy, -1, 1)), float(np.clip(ox, -1, 1))


def responses(state, frame):
    """Response maps ``(S, H, W)`` of the current filter at every search scale."""
    factors = state.scale * state.config.scale_factors()
    xs = np.stack([_sample(state, frame, s) for s in factors])
    wf = np.conj(fft2(state.effective_filter()))
    return ifft2(np.einsum("sdhw,dhw->shw", fft2(xs), wf)), factors


def localize(state, frame):
    """Move ``state`` to the joint argmax over positions and scales.

    Returns ``(center, scale_index, peak)``.
    """
    resp, factors = responses(state, frame)
    s, i, j = np.unravel_index(np.argmax(resp), resp.shape)
    H, W = resp.shape[1:]
    oi, oj = _subcell_peak(resp[s], i, j)
    di = (i + H // 2) % H - H // 2 + oi
    dj = (j + W // 2) % W - W // 2 + oj
    step = state.config.cell_size * state.resolution * factors[s]
    center = state.center + np.array([dj, di]) * step
    rows, cols = np.asarray(frame).shape[:2]
    state.center = np.clip(center, [0, 0], [cols - 1e-6, rows - 1e-6])
    state.scale = float(factors[s])
    state.last_peak = float(resp[s, i, j])
    return state.center.copy(), int(s), state.last_peak


def update(state, frame):
    """Store the sample at the current estimate; relearn every ``update_interval`` frames."""
    cfg = state.config
    state.frame_index += 1
    t = state.frame_index
    sample = _sample(state, frame, state.scale)
    state.memory.insert(sample, learning_rate(t, cfg.lr_early, cfg.lr_late, cfg.early_frames))
    if (t - 1) % cfg.update_interval == 0:
        ts = state.memory.training_set(state.label)
        h, beta = joint_learn(ts, state.masks, state.h, state.reliability.beta, cfg.learn)
        state.h = h
        state.reliability = assemble_reliability(beta, state.masks,
                                                 cfg.learn.theta_min, cfg.learn.theta_max)
    return state


def track_sequence(frames, gt_first_box, cfg=None, on_frame=None):
    """One box per frame, the first being ``gt_first_box``."""
    frames = iter(frames)
    state = init(next(frames), gt_first_box, cfg)
    boxes = [np.asarray(gt_first_box, dtype=float)]
    for frame in frames:
        localize(state, frame)
        update(state, frame)
        boxes.append(state.box())
        if on_frame is not None:
            on_frame(state)
    return boxes
