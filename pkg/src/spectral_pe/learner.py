"""Node classifiers trained on features concatenated with an encoding.

Three small architectures (linear, one-hidden-layer MLP, one-hop mean
aggregation) share a common trunk: features and positional encoding are
linearly projected into halves of the hidden width and concatenated.
The learnable encoding variants backpropagate into their coefficient
matrix through the cached product G = U B, so each step costs a few
small matmuls rather than a fresh eigenvector pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .chebyshev import cheb_basis
from .encodings import EncodingSpec, LlpeParams, build_encoding
from .errors import ConfigurationError, ParameterError, TrainingError
from .graphs import Graph, local_homophily_profile, quintile_bucketing, normalized_laplacian
from .spectral import (DENSE_CAP, SpectralDecomposition, canonicalize_kernel,
                       extremal_eigs, full_eigh, normalize_eigenvalues)

ARCHS = ("linear", "mlp", "sage1")
OPTIMIZERS = ("adam", "sgd_momentum")


@dataclass(frozen=True)
class ClassifierConfig:
    """Architecture and optimization settings for one training run."""

    arch: str = "mlp"
    hidden: int = 64
    lr: float = 0.01
    epochs: int = 200
    patience: int = 30
    weight_decay: float = 0.0
    optimizer: str = "adam"

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ParameterError(f"unknown arch {self.arch!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ParameterError(f"unknown optimizer {self.optimizer!r}")
        if self.lr <= 0:
            raise ParameterError("lr must be > 0")
        if self.epochs < 1 or self.patience < 1:
            raise ParameterError("epochs and patience must be >= 1")
        if self.hidden < 2 or self.hidden % 2:
            raise ParameterError("hidden width must be even and >= 2")
        if self.weight_decay < 0:
            raise ParameterError("weight_decay must be >= 0")


@dataclass(frozen=True)
class Split:
    """Disjoint train/val/test masks covering every node."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in ("train", "val", "test"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=bool))
        if not (self.train.shape == self.val.shape == self.test.shape):
            raise ParameterError("masks must share one shape")
        total = self.train.astype(int) + self.val.astype(int) + self.test.astype(int)
        if (total != 1).any():
            raise ParameterError("masks must partition the nodes")

    @property
    def n(self) -> int:
        return self.train.size


def split_nodes(n: int, fractions=(0.6, 0.2, 0.2), seed: int = 0) -> Split:
    """Random permutation split; sizes floor(n*f) plus remainder spread.

    The remainder goes to the splits with the largest fractional parts,
    earlier splits winning ties, so sizes are deterministic in n alone.
    """
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.size != 3 or abs(fractions.sum() - 1.0) > 1e-9 or (fractions < 0).any():
        raise ParameterError("fractions must be three nonnegatives summing to 1")
    raw = n * fractions
    sizes = np.floor(raw).astype(np.int64)
    frac = raw - sizes
    for _ in range(n - sizes.sum()):
        pick = np.argmax(frac)
        sizes[pick] += 1
        frac[pick] = -1.0
    perm = np.random.default_rng(seed).permutation(n)
    masks = []
    start = 0
    for size in sizes:
        m = np.zeros(n, dtype=bool)
        m[perm[start:start + size]] = True
        masks.append(m)
        start += size
    return Split(train=masks[0], val=masks[1], test=masks[2])


@dataclass
class TrainResult:
    """Outcome of one training run on one split."""

    test_accuracy: float
    val_accuracy: float
    best_epoch: int
    theta: LlpeParams | None
    quintile_accuracy: np.ndarray
    predictions: np.ndarray


def _mean_aggregator(graph: Graph) -> sp.csr_matrix:
    degrees = graph.degrees
    with np.errstate(divide="ignore"):
        inv = np.where(degrees > 0, 1.0 / degrees, 0.0)
    return sp.diags(inv) @ graph.adjacency()


class _Model:
    """Forward/backward for the shared trunk plus one head.

    Parameters live in a flat dict so optimizers and finite-difference
    checks can treat them uniformly.  `spectrum_cache` holds G = U B and
    B for the learnable encoding; both are fixed across steps.
    """

    def __init__(self, graph: Graph, enc_spec: EncodingSpec, config: ClassifierConfig,
                 num_classes: int, spectrum: SpectralDecomposition | None, seed: int):
        if graph.features is None or graph.labels is None:
            raise ConfigurationError("training needs features and labels")
        self.graph = graph
        self.spec = enc_spec
        self.config = config
        self.num_classes = num_classes
        self.learnable = enc_spec.variant in ("llpe", "llpe-large")
        rng = np.random.default_rng(seed)

        self.x = graph.features
        dx = self.x.shape[1]
        half = config.hidden // 2
        if self.learnable:
            spectrum = _require_spectrum(enc_spec, graph, spectrum)
            if enc_spec.variant == "llpe-large":
                from .encodings import _extremal_slice
                spectrum = _extremal_slice(spectrum, enc_spec.k)
            self.basis = cheb_basis(normalize_eigenvalues(spectrum.eigenvalues),
                                    enc_spec.order)
            self.gmat = spectrum.eigenvectors @ self.basis
            self.pe_static = None
            dp = enc_spec.dim
        else:
            if enc_spec.variant in ("lpe-fk", "lpe-flk", "lpe-full"):
                spectrum = _require_spectrum(enc_spec, graph, spectrum)
            self.pe_static = build_encoding(enc_spec, graph=graph,
                                            spectrum=spectrum).matrix
            self.basis = self.gmat = None
            dp = self.pe_static.shape[1]
        self.has_pe = dp > 0

        def gauss(*shape):
            return rng.standard_normal(shape) / np.sqrt(max(shape[0], 1))

        p: dict[str, np.ndarray] = {}
        p["Wx"] = gauss(dx, config.hidden if not self.has_pe else half)
        if self.has_pe:
            p["Wp"] = gauss(dp, half)
        if config.arch != "linear":
            p["b1"] = np.zeros(config.hidden)
        if config.arch == "sage1":
            p["W1"] = gauss(config.hidden, config.hidden)
            p["W2"] = gauss(config.hidden, config.hidden)
        p["Wo"] = gauss(config.hidden, num_classes)
        p["bo"] = np.zeros(num_classes)
        if self.learnable:
            p["theta"] = LlpeParams.init(enc_spec.order, enc_spec.dim,
                                         seed=seed + 104729).theta
        self.params = p
        self.agg = _mean_aggregator(graph) if config.arch == "sage1" else None

    def _encode(self, params) -> np.ndarray | None:
        if self.learnable:
            return self.gmat @ params["theta"]
        return self.pe_static if self.has_pe else None

    def logits(self, params) -> np.ndarray:
        out, _ = self._forward(params)
        return out

    def _forward(self, params):
        pe = self._encode(params)
        zx = self.x @ params["Wx"]
        z = np.hstack([zx, pe @ params["Wp"]]) if self.has_pe else zx
        cache = {"pe": pe, "z": z}
        if self.config.arch == "linear":
            h = z
        elif self.config.arch == "mlp":
            h = np.tanh(z + params["b1"])
        else:
            m = self.agg @ z
            h = np.tanh(z @ params["W1"] + m @ params["W2"] + params["b1"])
            cache["m"] = m
        cache["h"] = h
        return h @ params["Wo"] + params["bo"], cache

    def loss_and_grads(self, params, mask: np.ndarray):
        """Mean softmax cross-entropy over `mask` plus regularizers."""
        logits, cache = self._forward(params)
        y = self.graph.labels
        shifted = logits - logits.max(axis=1, keepdims=True)
        logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        logp = shifted - logz
        count = int(mask.sum())
        loss = -logp[mask, y[mask]].sum() / count

        probs = np.exp(logp)
        dlogits = np.zeros_like(logits)
        dlogits[mask] = probs[mask]
        dlogits[mask, y[mask]] -= 1.0
        dlogits /= count

        g: dict[str, np.ndarray] = {}
        h, z = cache["h"], cache["z"]
        g["Wo"] = h.T @ dlogits
        g["bo"] = dlogits.sum(axis=0)
        dh = dlogits @ params["Wo"].T
        if self.config.arch == "linear":
            dz = dh
        elif self.config.arch == "mlp":
            da = dh * (1.0 - h * h)
            g["b1"] = da.sum(axis=0)
            dz = da
        else:
            da = dh * (1.0 - h * h)
            g["b1"] = da.sum(axis=0)
            g["W1"] = z.T @ da
            g["W2"] = cache["m"].T @ da
            dz = da @ params["W1"].T + self.agg.T @ (da @ params["W2"].T)
        half = params["Wx"].shape[1]
        g["Wx"] = self.x.T @ dz[:, :half]
        if self.has_pe:
            pe = cache["pe"]
            g["Wp"] = pe.T @ dz[:, half:]
            if self.learnable:
                dpe = dz[:, half:] @ params["Wp"].T
                g["theta"] = self.gmat.T @ dpe

        if self.learnable and (self.spec.l1 > 0 or self.spec.l2 > 0):
            w = self.basis @ params["theta"]
            loss += self.spec.l1 * np.abs(w).sum() + self.spec.l2 * (w ** 2).sum()
            g["theta"] += self.basis.T @ (self.spec.l1 * np.sign(w)
                                          + 2.0 * self.spec.l2 * w)
        wd = self.config.weight_decay
        if wd > 0:
            for name in ("Wx", "Wp", "W1", "W2", "Wo"):
                if name in params:
                    loss += 0.5 * wd * (params[name] ** 2).sum()
                    g[name] = g[name] + wd * params[name]
        return float(loss), g


def _require_spectrum(spec: EncodingSpec, graph: Graph,
                      spectrum: SpectralDecomposition | None) -> SpectralDecomposition:
    if spectrum is not None:
        return spectrum
    lap = normalized_laplacian(graph)
    if spec.variant == "llpe-large":
        dec = extremal_eigs(lap, k_small=spec.k, k_large=spec.k)
    elif spec.variant in ("lpe-fk", "lpe-flk") and graph.n > DENSE_CAP:
        # a couple of spare pairs in case zero eigenvalues crowd the bottom
        dec = extremal_eigs(lap, k_small=spec.k + 4, k_large=spec.k)
    else:
        dec = full_eigh(lap)
    # solver-arbitrary kernel bases would make encodings on disconnected
    # graphs depend on LAPACK internals; pin them down
    return canonicalize_kernel(dec, graph.degrees)


class _Optimizer:
    def __init__(self, kind: str, lr: float, params: dict):
        self.kind = kind
        self.lr = lr
        self.t = 0
        self.state = {k: (np.zeros_like(v), np.zeros_like(v)) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        for key, grad in grads.items():
            m, v = self.state[key]
            if self.kind == "adam":
                m[:] = 0.9 * m + 0.1 * grad
                v[:] = 0.999 * v + 0.001 * grad * grad
                mhat = m / (1.0 - 0.9 ** self.t)
                vhat = v / (1.0 - 0.999 ** self.t)
                params[key] -= self.lr * mhat / (np.sqrt(vhat) + 1e-8)
            else:
                m[:] = 0.9 * m + grad
                params[key] -= self.lr * m


def _accuracy(logits: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return float("nan")
    return float((logits[mask].argmax(axis=1) == labels[mask]).mean())


def train_node_classifier(graph: Graph, enc_spec: EncodingSpec, split: Split,
                          config: ClassifierConfig, seed: int = 0,
                          spectrum: SpectralDecomposition | None = None) -> TrainResult:
    """Full-batch training with early stopping on validation accuracy.

    The model with the best validation accuracy (earliest epoch on ties)
    is restored before test evaluation.  A non-finite loss aborts with a
    TrainingError naming the last finite epoch.
    """
    if graph.labels is None:
        raise ConfigurationError("training needs labels")
    if split.n != graph.n:
        raise ConfigurationError("split does not cover this graph")
    if not split.train.any() or not split.val.any():
        raise ConfigurationError("training needs nonempty train and val sets")
    num_classes = int(graph.labels.max()) + 1
    model = _Model(graph, enc_spec, config, num_classes, spectrum, seed)
    opt = _Optimizer(config.optimizer, config.lr, model.params)

    best_val, best_epoch, best_params = -1.0, 0, None
    since_best = 0
    for epoch in range(1, config.epochs + 1):
        loss, grads = model.loss_and_grads(model.params, split.train)
        if not np.isfinite(loss):
            raise TrainingError(
                f"loss became non-finite at epoch {epoch}; "
                f"last finite epoch {epoch - 1}")
        opt.step(model.params, grads)
        val_acc = _accuracy(model.logits(model.params), graph.labels, split.val)
        if val_acc > best_val:
            best_val, best_epoch = val_acc, epoch
            best_params = {k: v.copy() for k, v in model.params.items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break
    model.params = best_params
    logits = model.logits(model.params)
    preds = logits.argmax(axis=1)
    theta = LlpeParams(model.params["theta"]) if "theta" in model.params else None
    return TrainResult(
        test_accuracy=_accuracy(logits, graph.labels, split.test),
        val_accuracy=best_val,
        best_epoch=best_epoch,
        theta=theta,
        quintile_accuracy=evaluate_by_quintile(graph, preds),
        predictions=preds)


def evaluate_by_quintile(graph: Graph, predictions: np.ndarray) -> np.ndarray:
    """Accuracy within each local-homophily quintile; NaN where empty.

    Isolated nodes have no local homophily and are left out of every
    bucket.
    """
    if graph.labels is None:
        raise ConfigurationError("quintile evaluation needs labels")
    predictions = np.asarray(predictions)
    values, isolated = local_homophily_profile(graph)
    present = ~isolated
    out = np.full(5, np.nan)
    if not present.any():
        return out
    buckets = quintile_bucketing(values[present])
    correct = (predictions == graph.labels)[present]
    for b in range(5):
        mask = buckets == b
        if mask.any():
            out[b] = float(correct[mask].mean())
    return out
