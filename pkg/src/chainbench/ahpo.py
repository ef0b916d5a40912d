"""Adaptive hybrid policy optimisation: the loss kernel.

The loss mixes an off-policy negative log-likelihood on expert sequences with
an on-policy clipped surrogate over a group of sampled trajectories:

    loss = -(1/Z) * ( xi * sum_{i,t} log pi(y*_{i,t})
                      + sum_{i,t} min(r_{i,t} A_i, clamp(r_{i,t}, 1-eps, 1+eps) A_i) )

with r = exp(log pi - log pi_old), group-normalised advantages
A_i = (R_i - mean R) / (std R + eps_std) (population std), and the gate
xi = 1 iff fewer than R_hat trajectories in the group succeeded.  There is
no KL term.  ``xi`` is a constant under differentiation.

``z_mode="total_tokens"`` uses one normaliser Z = xi * (expert tokens) +
(on-policy tokens).  ``z_mode="per_term"`` normalises each sum by its own
token count instead.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

Z_MODES = ("total_tokens", "per_term")


class AhpoError(ValueError):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code


@dataclass
class AhpoConfig:
    eps: float = 0.2
    r_hat: int = 2
    eps_std: float = 1e-8
    z_mode: str = "total_tokens"
    group_size: int = 5  # default rollouts per prompt, used by the toy generators

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if int(self.r_hat) != self.r_hat or self.r_hat < 1:
            raise ValueError("r_hat must be a positive integer")
        if self.z_mode not in Z_MODES:
            raise ValueError(f"z_mode must be one of {Z_MODES}")


@dataclass
class RolloutGroup:
    rewards: np.ndarray                # (N,) in {0, 1}
    logp: list[np.ndarray]             # per trajectory, current per-token log-probs
    old_logp: list[np.ndarray]         # per trajectory, behaviour-policy log-probs

    def __post_init__(self):
        self.rewards = np.asarray(self.rewards, dtype=float)
        self.logp = [np.asarray(x, dtype=float) for x in self.logp]
        self.old_logp = [np.asarray(x, dtype=float) for x in self.old_logp]
        if not (len(self.rewards) == len(self.logp) == len(self.old_logp)):
            raise AhpoError("malformed_group", "rewards and token arrays differ in length")
        if any(a.shape != b.shape for a, b in zip(self.logp, self.old_logp)):
            raise AhpoError("malformed_group", "token arrays are not aligned")
        if not np.all((self.rewards == 0) | (self.rewards == 1)):
            raise AhpoError("malformed_group", "rewards must be binary")

    @property
    def tokens(self) -> int:
        return int(sum(len(x) for x in self.logp))


@dataclass
class ExpertBatch:
    logp: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.logp = [np.asarray(x, dtype=float) for x in self.logp]
        if any(np.any(x > 0) for x in self.logp):
            raise AhpoError("malformed_expert", "log-probabilities must be nonpositive")

    @property
    def tokens(self) -> int:
        return int(sum(len(x) for x in self.logp))


@dataclass
class AhpoResult:
    loss: float
    xi: int
    advantages: np.ndarray
    clip_terms: list[np.ndarray]
    expert_terms: list[np.ndarray]
    z: float | tuple[float, float]
    grad_logp: list[np.ndarray]         # d loss / d log pi for on-policy tokens
    grad_expert_logp: list[np.ndarray]  # d loss / d log pi for expert tokens

    def summary(self) -> dict:
        return {"loss": self.loss, "xi": self.xi, "advantages": self.advantages.tolist(),
                "z": list(self.z) if isinstance(self.z, tuple) else self.z,
                "clip_terms": [t.tolist() for t in self.clip_terms],
                "expert_terms": [t.tolist() for t in self.expert_terms]}


def advantages(rewards: Sequence[float], eps_std: float = 1e-8) -> np.ndarray:
    r = np.asarray(rewards, dtype=float)
    if r.size < 2:
        raise AhpoError("group_too_small", f"need at least 2 trajectories, got {r.size}")
    centred = r - r.mean()
    if np.all(r == r[0]):
        return np.zeros_like(r)  # exact zeros, not rounding noise
    return centred / (r.std() + eps_std)


def gate(rewards: Sequence[float], r_hat: int = 2) -> int:
    """1 when successes fall strictly below ``r_hat``."""
    return int(int(np.sum(np.asarray(rewards) == 1)) < r_hat)


def clip_term(r, a, eps: float):
    return np.minimum(r * a, np.clip(r, 1 - eps, 1 + eps) * a)


def _clip_grad(r: np.ndarray, a: float, eps: float) -> np.ndarray:
    """d clip_term / d log r: r*a where the unclamped branch is the minimum, else 0."""
    unclamped = r * a <= np.clip(r, 1 - eps, 1 + eps) * a
    return np.where(unclamped, r * a, 0.0)


def ahpo_loss(group: RolloutGroup, expert: ExpertBatch, cfg: Optional[AhpoConfig] = None,
              xi: Optional[int] = None, z: Optional[float] = None) -> AhpoResult:
    """Loss value plus its gradient with respect to every per-token log-probability.

    ``xi`` overrides the gate (for reduction checks); ``z`` overrides the
    single normaliser in total_tokens mode.
    """
    cfg = cfg or AhpoConfig()
    adv = advantages(group.rewards, cfg.eps_std)
    xi = gate(group.rewards, cfg.r_hat) if xi is None else int(xi)
    ratios = [np.exp(lp - old) for lp, old in zip(group.logp, group.old_logp)]
    clip_terms = [clip_term(r, a, cfg.eps) for r, a in zip(ratios, adv)]
    expert_terms = [xi * lp for lp in expert.logp]
    on_sum = float(sum(t.sum() for t in clip_terms))
    off_sum = float(sum(t.sum() for t in expert_terms))
    if cfg.z_mode == "total_tokens":
        zz = float(z) if z is not None else float(xi * expert.tokens + group.tokens)
        zz = zz or 1.0
        loss = -(off_sum + on_sum) / zz
        z_on = z_off = zz
        z_out: float | tuple[float, float] = zz
    else:
        z_off = float(expert.tokens) or 1.0
        z_on = float(group.tokens) or 1.0
        loss = -(off_sum / z_off + on_sum / z_on)
        z_out = (z_off, z_on)
    grad_on = [-_clip_grad(r, a, cfg.eps) / z_on for r, a in zip(ratios, adv)]
    grad_off = [np.full_like(lp, -xi / z_off) for lp in expert.logp]
    return AhpoResult(loss, xi, adv, clip_terms, expert_terms, z_out, grad_on, grad_off)


def on_policy_only_loss(group: RolloutGroup, cfg: Optional[AhpoConfig] = None) -> float:
    """The group-relative clipped objective on its own (no expert term)."""
    cfg = cfg or AhpoConfig()
    adv = advantages(group.rewards, cfg.eps_std)
    total = 0.0
    for lp, old, a in zip(group.logp, group.old_logp, adv):
        total += float(clip_term(np.exp(lp - old), a, cfg.eps).sum())
    return -total / (group.tokens or 1)


# -- toy categorical policy and finite-difference check -------------------------------------


@dataclass
class ToyBatch:
    """Token ids and logit-table rows for a toy tabular policy.

    Each token (i, t) is scored by the row ``ctx[i][t]`` of a (C, V) logit
    table; expert sequences use rows disjoint from the on-policy ones.
    """

    vocab: int
    old_logits: np.ndarray
    rewards: np.ndarray
    tokens: list[np.ndarray]
    ctx: list[np.ndarray]
    expert_tokens: list[np.ndarray]
    expert_ctx: list[np.ndarray]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    return logits - m - np.log(np.exp(logits - m).sum(axis=-1, keepdims=True))


def toy_inputs(logits: np.ndarray, b: ToyBatch) -> tuple[RolloutGroup, ExpertBatch]:
    lsm = _log_softmax(logits)
    old = _log_softmax(b.old_logits)
    group = RolloutGroup(b.rewards, [lsm[c, t] for c, t in zip(b.ctx, b.tokens)],
                         [old[c, t] for c, t in zip(b.ctx, b.tokens)])
    expert = ExpertBatch([lsm[c, t] for c, t in zip(b.expert_ctx, b.expert_tokens)])
    return group, expert


def toy_loss_and_grad(logits: np.ndarray, b: ToyBatch, cfg: AhpoConfig,
                      xi: Optional[int] = None) -> tuple[float, np.ndarray, AhpoResult]:
    """Loss and analytic d loss / d logits through the log-softmax."""
    group, expert = toy_inputs(logits, b)
    res = ahpo_loss(group, expert, cfg, xi=xi)
    probs = np.exp(_log_softmax(logits))
    grad = np.zeros_like(logits)
    pairs = list(zip(b.ctx, b.tokens, res.grad_logp)) + list(zip(b.expert_ctx, b.expert_tokens, res.grad_expert_logp))
    for ctx, tok, g in pairs:
        for c, t, gv in zip(ctx, tok, g):
            if gv:
                grad[c] -= gv * probs[c]
                grad[c, t] += gv
    return res.loss, grad, res


def grad_check(logits: np.ndarray, b: ToyBatch, cfg: AhpoConfig, h: float = 1e-5) -> float:
    """Max-norm relative error between analytic and central-difference gradients.

    The gate is evaluated once at ``logits`` and held fixed.
    """
    loss, grad, res = toy_loss_and_grad(logits, b, cfg)
    num = np.zeros_like(logits)
    for idx in np.ndindex(*logits.shape):
        up = logits.copy()
        up[idx] += h
        dn = logits.copy()
        dn[idx] -= h
        num[idx] = (toy_loss_and_grad(up, b, cfg, xi=res.xi)[0] - toy_loss_and_grad(dn, b, cfg, xi=res.xi)[0]) / (2 * h)
    scale = max(np.abs(grad).max(), np.abs(num).max())
    if scale == 0:
        return 0.0
    return float(np.abs(grad - num).max() / scale)


def random_toy(seed: int, cfg: Optional[AhpoConfig] = None, vocab: Optional[int] = None,
               max_len: int = 8, n_expert: int = 2, rewards: Optional[Sequence[int]] = None,
               kink_margin: float = 1e-3) -> tuple[np.ndarray, ToyBatch]:
    """A random toy configuration (vocab <= 16, length <= 8).

    Behaviour logits are resampled until no ratio lies within ``kink_margin``
    of a clamp boundary, where the objective is not differentiable.
    """
    cfg = cfg or AhpoConfig()
    rng = np.random.default_rng(seed)
    V = int(vocab or rng.integers(2, 17))
    N = cfg.group_size
    lengths = rng.integers(1, max_len + 1, size=N)
    e_lengths = rng.integers(1, max_len + 1, size=n_expert)
    C_on = max_len
    C = C_on + int(e_lengths.sum())
    tokens = [rng.integers(0, V, size=L) for L in lengths]
    ctx = [np.arange(L) for L in lengths]  # on-policy rows: one per position
    starts = np.concatenate([[0], np.cumsum(e_lengths)[:-1]]) + C_on
    e_tokens = [rng.integers(0, V, size=L) for L in e_lengths]
    e_ctx = [s + np.arange(L) for s, L in zip(starts, e_lengths)]
    rw = np.asarray(rewards if rewards is not None else rng.integers(0, 2, size=N), dtype=float)
    logits = rng.normal(0, 1, size=(C, V))
    lsm = _log_softmax(logits)
    for _ in range(1000):
        old = logits + rng.normal(0, 0.3, size=(C, V))
        olsm = _log_softmax(old)
        r = np.concatenate([np.exp(lsm[c, t] - olsm[c, t]) for c, t in zip(ctx, tokens)])
        if np.all(np.minimum(np.abs(r - (1 - cfg.eps)), np.abs(r - (1 + cfg.eps))) > kink_margin):
            break
    b = ToyBatch(V, old, rw, tokens, ctx, e_tokens, e_ctx)
    return logits, b


def demo(path: Optional[str] = None, cfg: Optional[AhpoConfig] = None) -> dict:
    """Evaluate the loss on a batch file, or on a built-in toy batch.

    Batch file (JSON): {"rewards": [...], "logp": [[...], ...], "old_logp": [[...], ...],
    "expert_logp": [[...], ...], optional "eps", "r_hat", "eps_std", "z_mode"}.
    """
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        base = cfg or AhpoConfig()
        cfg = AhpoConfig(eps=data.get("eps", base.eps), r_hat=data.get("r_hat", base.r_hat),
                         eps_std=data.get("eps_std", base.eps_std), z_mode=data.get("z_mode", base.z_mode))
        group = RolloutGroup(data["rewards"], data["logp"], data["old_logp"])
        expert = ExpertBatch(data.get("expert_logp", []))
        return ahpo_loss(group, expert, cfg).summary()
    cfg = cfg or AhpoConfig()
    logits, b = random_toy(0, cfg, rewards=[1, 0, 0, 0, 0])
    loss, _, res = toy_loss_and_grad(logits, b, cfg)
    out = res.summary()
    out["grad_check_max_rel_error"] = grad_check(logits, b, cfg)
    return out
