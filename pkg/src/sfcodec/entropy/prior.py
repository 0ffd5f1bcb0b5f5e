"""Trainable fully factorized per-channel prior.

Each channel owns a univariate CDF built from a small stack of monotone
nonlinearities: matrices pass through softplus (nonnegative), gates are
``u + tanh(a) * tanh(u)`` with |tanh(a)| < 1, and the final layer is a
sigmoid.  The construction is monotone for any parameter values, so bin
probabilities cdf(x+1/2) - cdf(x-1/2) are always valid.

For coding, the continuous model is frozen into per-channel cumulative
frequency tables with 16-bit total precision and at least one count per
symbol.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .. import autodiff as ad
from .. import nn
from ..errors import StateError

TOTAL_FREQ_BITS = 16
TOTAL_FREQ = 1 << TOTAL_FREQ_BITS
LIKELIHOOD_FLOOR = 1e-9
_LN2 = float(np.log(2.0))


class FactorizedPrior(nn.Module):
    def __init__(
        self,
        channels: int,
        filters: tuple[int, ...] = (3, 3, 3),
        init_scale: float = 10.0,
        symbol_min: int = -127,
        symbol_max: int = 128,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng(0)
        if channels < 0:
            raise ValueError("channels must be nonnegative")
        if symbol_min >= symbol_max:
            raise ValueError("symbol range is empty")
        self.channels = channels
        self.filters = tuple(int(f) for f in filters)
        self.symbol_min = int(symbol_min)
        self.symbol_max = int(symbol_max)
        dims = (1,) + self.filters + (1,)
        scale = init_scale ** (1.0 / (len(dims) - 1))
        matrices, biases, factors = [], [], []
        for k in range(len(dims) - 1):
            din, dout = dims[k], dims[k + 1]
            init = np.log(np.expm1(1.0 / scale / dout))
            matrices.append(ad.Parameter(np.full((channels, dout, din), init, np.float32)))
            biases.append(
                ad.Parameter(rng.uniform(-0.5, 0.5, (channels, dout, 1)).astype(np.float32))
            )
            if k < len(dims) - 2:
                factors.append(ad.Parameter(np.zeros((channels, dout, 1), np.float32)))
        self.matrices = nn.ModuleList(matrices)
        self.biases = nn.ModuleList(biases)
        self.factors = nn.ModuleList(factors)
        self.clip_count = 0
        self._tables: np.ndarray | None = None
        self._tables_hash: bytes | None = None

    # -- continuous model -------------------------------------------------------

    @property
    def num_symbols(self) -> int:
        return self.symbol_max - self.symbol_min + 1

    def cdf_logits(self, u: ad.Tensor) -> ad.Tensor:
        """Monotone pre-sigmoid chain over (C, 1, M) inputs."""
        n_layers = len(self.matrices)
        for k in range(n_layers):
            w = ad.softplus(self.matrices[k].value)
            u = ad.add(ad.matmul(w, u), self.biases[k].value)
            if k < n_layers - 1:
                gate = ad.tanh(self.factors[k].value)
                u = ad.add(u, ad.mul(gate, ad.tanh(u)))
        return u

    def likelihood(self, latent: ad.Tensor) -> ad.Tensor:
        """Per-element bin probability cdf(x+1/2)-cdf(x-1/2), floored."""
        n, c, h, w = latent.shape
        if c != self.channels:
            raise StateError(
                f"prior has {self.channels} channels, latent has {c}"
            )
        x = ad.reshape(ad.transpose(latent, (1, 0, 2, 3)), (c, 1, n * h * w))
        upper = ad.sigmoid(self.cdf_logits(ad.add_const(x, 0.5)))
        lower = ad.sigmoid(self.cdf_logits(ad.add_const(x, -0.5)))
        p = ad.lower_bound(ad.sub(upper, lower), LIKELIHOOD_FLOOR)
        return ad.transpose(ad.reshape(p, (c, n, h, w)), (1, 0, 2, 3))

    def bits(self, latent: ad.Tensor) -> ad.Tensor:
        """Differentiable total information content in bits."""
        p = self.likelihood(latent)
        return ad.scale(ad.sum_all(ad.log(p)), -1.0 / _LN2)

    # -- frozen table model -------------------------------------------------------

    def _cdf_numpy(self, grid: np.ndarray) -> np.ndarray:
        """Float64 CDF evaluation used for table construction (no tape)."""
        u = np.broadcast_to(grid, (self.channels, 1, grid.size)).astype(np.float64)
        n_layers = len(self.matrices)
        for k in range(n_layers):
            w = np.logaddexp(0.0, self.matrices[k].value.data.astype(np.float64))
            u = np.matmul(w, u) + self.biases[k].value.data.astype(np.float64)
            if k < n_layers - 1:
                a = np.tanh(self.factors[k].value.data.astype(np.float64))
                u = u + a * np.tanh(u)
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + np.exp(-u[:, 0, :]))

    def param_hash(self) -> bytes:
        h = hashlib.md5()
        h.update(f"{self.channels},{self.filters},{self.symbol_min},{self.symbol_max}".encode())
        for _, p in sorted(self.named_parameters()):
            h.update(p.value.data.tobytes())
        return h.digest()

    def build_cdf_tables(self) -> None:
        """Freeze the continuous model into integer cumulative-frequency tables."""
        if self.channels == 0:
            self._tables = np.zeros((0, self.num_symbols + 1), dtype=np.uint32)
            self._tables_hash = self.param_hash()
            return
        smin, smax = self.symbol_min, self.symbol_max
        grid = np.arange(smin, smax + 2, dtype=np.float64) - 0.5
        cdf = self._cdf_numpy(grid)  # (C, S+1)
        pmf = np.diff(cdf, axis=1)
        pmf[:, 0] += cdf[:, 0]  # fold tails into the edge symbols
        pmf[:, -1] += 1.0 - cdf[:, -1]
        pmf = np.maximum(pmf, 0.0)
        pmf /= pmf.sum(axis=1, keepdims=True)

        s = self.num_symbols
        scaled = pmf * (TOTAL_FREQ - s)
        freq = np.floor(scaled).astype(np.int64) + 1
        tables = np.zeros((self.channels, s + 1), dtype=np.uint32)
        for c in range(self.channels):
            deficit = TOTAL_FREQ - int(freq[c].sum())
            if deficit:
                remainder = scaled[c] - np.floor(scaled[c])
                order = np.argsort(-remainder, kind="stable")
                freq[c, order[:deficit]] += 1
            tables[c, 1:] = np.cumsum(freq[c])
        self._tables = tables
        self._tables_hash = self.param_hash()

    @property
    def tables(self) -> np.ndarray:
        if self._tables is None:
            raise StateError("CDF tables not built; call build_cdf_tables() first")
        return self._tables

    def check_tables_fresh(self) -> None:
        if self._tables is None:
            raise StateError("CDF tables not built; call build_cdf_tables() first")
        if self._tables_hash != self.param_hash():
            raise StateError(
                "CDF tables are stale: prior parameters changed after build_cdf_tables()"
            )

    def table_bits(self, symbols: np.ndarray) -> float:
        """Cross-entropy in bits of integer symbols (C, ...) under the frozen tables."""
        tables = self.tables
        sym = np.asarray(symbols)
        if sym.size == 0:
            return 0.0
        idx = sym.reshape(self.channels, -1) - self.symbol_min
        freq = (
            tables[np.arange(self.channels)[:, None], idx + 1]
            - tables[np.arange(self.channels)[:, None], idx]
        ).astype(np.float64)
        return float((TOTAL_FREQ_BITS - np.log2(freq)).sum())
