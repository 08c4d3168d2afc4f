"""Dense policy/value networks with hand-written gradients.

The guided search needs two small multilayer perceptrons: a policy head that
scores the 41 candidate values of the coefficient being chosen next, and a
value head estimating the eventual win/loss in [-1, 1]. Training is plain
gradient descent on

    loss = (z - v)^2 - pi . log(p) + lambda * ||theta||^2

so the networks stay self-contained here: float64 forward passes that cache
pre-activations, and a backward pass returning exact analytic gradients
(checked against finite differences in the tests).

Freshly built networks have zeroed final layers, which makes the initial
policy exactly uniform over each block and the initial value exactly 0.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteLossError

MAGIC = b"QZNET001"


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


class Mlp:
    """Fully connected stack; hidden layers rectified, final layer linear.

    forward returns the final linear output (logits for the policy net, the
    pre-squash scalar for the value net); any output nonlinearity is the
    caller's job so its gradient can be folded into grad_out for backward.
    """

    def __init__(self, sizes: list[int], seed: int = 0, zero_final: bool = True):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        last = len(sizes) - 2
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if zero_final and i == last:
                self.weights.append(np.zeros((fan_in, fan_out)))
                self.biases.append(np.zeros(fan_out))
            else:
                bound = fan_in**-0.5
                self.weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
                self.biases.append(rng.uniform(-bound, bound, fan_out))

    def forward(self, x: np.ndarray):
        """x: (batch, in) -> (final linear output, cache for backward)."""
        h = np.asarray(x, dtype=np.float64)
        cache = []
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            cache.append((h, z))
            h = relu(z) if i < last else z
        return h, cache

    def backward(self, cache, grad_out: np.ndarray):
        """grad_out: dLoss/d(final linear output). Returns (dW list, db list)."""
        grads_w = [np.empty(0)] * len(self.weights)
        grads_b = [np.empty(0)] * len(self.biases)
        g = np.asarray(grad_out, dtype=np.float64)
        for i in reversed(range(len(self.weights))):
            h_in, z = cache[i]
            grads_w[i] = h_in.T @ g
            grads_b[i] = g.sum(axis=0)
            if i > 0:
                g = (g @ self.weights[i].T) * (cache[i][0] > 0)
                # cache[i][0] is relu(z_{i-1}); positive exactly where z_{i-1} > 0
        return grads_w, grads_b

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


@dataclass(frozen=True)
class NetsConfig:
    input_dim: int
    num_levels: int  # candidate values per coefficient (41 on the default grid)
    num_modes: int
    policy_hidden: tuple[int, ...] = (256, 128)
    value_hidden: tuple[int, ...] = (256, 128, 64)
    policy_width: int | None = None  # override; default num_modes * num_levels
    weight_decay: float = 1e-4
    seed: int = 0

    @property
    def policy_out(self) -> int:
        return self.policy_width if self.policy_width is not None else self.num_modes * self.num_levels


class PolicyValueNets:
    """The paired networks plus the block-masked policy readout."""

    def __init__(self, config: NetsConfig):
        self.config = config
        self.policy = Mlp(
            [config.input_dim, *config.policy_hidden, config.policy_out],
            seed=config.seed,
        )
        self.value = Mlp([config.input_dim, *config.value_hidden, 1], seed=config.seed + 1)

    def _block(self, level: int) -> slice:
        lo = level * self.config.num_levels
        return slice(lo, lo + self.config.num_levels)

    def _check_width(self):
        expected = self.config.num_modes * self.config.num_levels
        if self.config.policy_out != expected:
            raise ValueError(
                f"policy output width {self.config.policy_out} cannot be block-masked "
                f"for {self.config.num_modes} x {self.config.num_levels} actions"
            )

    def evaluate(self, input_vec: np.ndarray, level: int):
        """Priors over the current level's candidate block, and the value estimate."""
        priors, values = self.evaluate_batch(input_vec[None, :], np.array([level]))
        return priors[0], float(values[0])

    def evaluate_batch(self, inputs: np.ndarray, levels: np.ndarray):
        self._check_width()
        logits, _ = self.policy.forward(inputs)
        priors = np.zeros((inputs.shape[0], self.config.num_levels))
        for row, level in enumerate(levels):
            block = logits[row, self._block(int(level))]
            shifted = np.exp(block - block.max())
            priors[row] = shifted / shifted.sum()
        u, _ = self.value.forward(inputs)
        return priors, np.tanh(u[:, 0])

    def masked_policy(self, inputs: np.ndarray, levels: np.ndarray) -> np.ndarray:
        """Full-width policy distributions: softmax inside each sample's level
        block, exact zeros everywhere else."""
        self._check_width()
        logits, _ = self.policy.forward(np.asarray(inputs, dtype=np.float64))
        probs = np.zeros_like(logits)
        for row, level in enumerate(levels):
            block = self._block(int(level))
            b = logits[row, block]
            e = np.exp(b - b.max())
            probs[row, block] = e / e.sum()
        return probs

    def l2_penalty(self) -> float:
        return float(sum(float(np.sum(p * p)) for p in self.all_params()))

    def all_params(self) -> list[np.ndarray]:
        return self.policy.params() + self.value.params()

    def loss_and_grads(self, inputs, levels, policy_targets, value_targets):
        """Mean batch loss and matching gradients.

        policy_targets: (batch, num_levels), a distribution over each sample's
        level block (one-hot for imitation data, visit frequencies otherwise).
        value_targets: (batch,) in [-1, 1].
        """
        self._check_width()
        inputs = np.asarray(inputs, dtype=np.float64)
        levels = np.asarray(levels, dtype=np.int64)
        policy_targets = np.asarray(policy_targets, dtype=np.float64)
        value_targets = np.asarray(value_targets, dtype=np.float64)
        batch = inputs.shape[0]

        logits, pol_cache = self.policy.forward(inputs)
        u, val_cache = self.value.forward(inputs)
        v = np.tanh(u[:, 0])

        probs = np.zeros_like(logits)
        cross_entropy = 0.0
        grad_logits = np.zeros_like(logits)
        for row in range(batch):
            block = self._block(int(levels[row]))
            b_logits = logits[row, block]
            shifted = np.exp(b_logits - b_logits.max())
            p = shifted / shifted.sum()
            probs[row, block] = p
            target = policy_targets[row]
            cross_entropy -= float(target @ np.log(p + 1e-300))
            grad_logits[row, block] = (p - target) / batch

        value_sq = (value_targets - v) ** 2
        lam = self.config.weight_decay
        loss = float(value_sq.mean() + cross_entropy / batch + lam * self.l2_penalty())
        if not np.isfinite(loss):
            raise NonFiniteLossError(
                f"loss diverged: value term {value_sq.mean()}, entropy term {cross_entropy / batch}"
            )

        grad_u = (2.0 * (v - value_targets) * (1.0 - v**2) / batch)[:, None]
        pol_gw, pol_gb = self.policy.backward(pol_cache, grad_logits)
        val_gw, val_gb = self.value.backward(val_cache, grad_u)

        grads = pol_gw + pol_gb + val_gw + val_gb
        params = self.policy.weights + self.policy.biases + self.value.weights + self.value.biases
        for g, p in zip(grads, params):
            g += 2.0 * lam * p
        return loss, grads

    def apply_grads(self, grads: list[np.ndarray], lr: float):
        params = self.policy.weights + self.policy.biases + self.value.weights + self.value.biases
        for p, g in zip(params, grads):
            p -= lr * g

    def clone(self) -> "PolicyValueNets":
        other = PolicyValueNets(self.config)
        other.policy.weights = [w.copy() for w in self.policy.weights]
        other.policy.biases = [b.copy() for b in self.policy.biases]
        other.value.weights = [w.copy() for w in self.value.weights]
        other.value.biases = [b.copy() for b in self.value.biases]
        return other


def save_checkpoint(nets: PolicyValueNets, path: str):
    """Versioned binary: magic, JSON header length, header, float64 LE weights."""
    cfg = nets.config
    header = json.dumps(
        {
            "input_dim": cfg.input_dim,
            "num_levels": cfg.num_levels,
            "num_modes": cfg.num_modes,
            "policy_hidden": list(cfg.policy_hidden),
            "value_hidden": list(cfg.value_hidden),
            "policy_width": cfg.policy_width,
            "weight_decay": cfg.weight_decay,
            "seed": cfg.seed,
        }
    ).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for p in nets.all_params():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path: str) -> PolicyValueNets:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not a network checkpoint")
        (header_len,) = struct.unpack("<I", fh.read(4))
        doc = json.loads(fh.read(header_len).decode())
        nets = PolicyValueNets(
            NetsConfig(
                input_dim=doc["input_dim"],
                num_levels=doc["num_levels"],
                num_modes=doc["num_modes"],
                policy_hidden=tuple(doc["policy_hidden"]),
                value_hidden=tuple(doc["value_hidden"]),
                policy_width=doc["policy_width"],
                weight_decay=doc["weight_decay"],
                seed=doc["seed"],
            )
        )
        for p in nets.all_params():
            raw = fh.read(p.size * 8)
            if len(raw) != p.size * 8:
                raise ValueError("checkpoint truncated")
            p[...] = np.frombuffer(raw, dtype="<f8").reshape(p.shape)
        if fh.read(1):
            raise ValueError("trailing bytes after checkpoint weights")
    return nets
