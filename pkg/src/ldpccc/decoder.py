"""Pipelined stream decoder and its message-update kernels.

The decoder holds I serially connected processors.  Each decoding step
feeds one new block of channel LLRs into the first processor, shifts the
block leaving each processor into the next one, runs a check-node update on
the block row entering every processor, and a variable-node update on the
variable block about to leave it.  The last processor produces hard
decisions from the full a-posteriori sum.  Because every check-node update
in processor i consumes variable-to-check messages produced by processor
i - 1, the pipeline computes exactly I flooding iterations per variable
block, one iteration per processor, in systolic form.

Messages live in per-row flat arrays aligned with
``ConvCode.row_structure``; a slot holds a variable-to-check value from the
moment its block arrives until the row's check update consumes it, then the
written-back check-to-variable value until the block's variable update
consumes that.  The float and 4-bit table-driven variants share this
machinery and differ only in the kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .construction import ConvCode, SparseBinaryMatrix, syndrome_check, window_matrix
from .quantization import (
    PairLut,
    Quantizer,
    build_pair_lut,
    from_twos_complement,
    to_twos_complement,
)

__all__ = [
    "VARIANT_FLOAT",
    "VARIANT_QSPA",
    "DecoderConfig",
    "ProcessorState",
    "StreamDecoder",
    "StepOutput",
    "StreamResult",
    "cnp_float",
    "cnp_qspa",
    "vnp",
    "app_decide",
    "decoding_step",
    "decode_stream",
    "BlockDecoder",
]

VARIANT_FLOAT = "float"
VARIANT_QSPA = "qspa"

_TANH_FLOOR = 1e-300
_TANH_CEIL = 1.0 - 1e-15


# ---------------------------------------------------------------------------
# kernels


def _cnp_float_rows(v: np.ndarray, clamp: float) -> np.ndarray:
    """Check update on a (n_checks, degree) block of variable-to-check values.

    Magnitudes are combined in the log-tanh domain; an exact zero input
    zeroes every other output of its check.
    """
    v = np.asarray(v, dtype=np.float64)
    sign = np.where(v < 0, -1.0, 1.0)
    zero = v == 0.0
    n_zero = zero.sum(axis=1, keepdims=True)
    av = np.abs(v)
    t = np.tanh(0.5 * av)
    lt = np.log(np.clip(t, _TANH_FLOOR, _TANH_CEIL))
    lt = np.where(zero, 0.0, lt)
    total = lt.sum(axis=1, keepdims=True)
    mag = 2.0 * np.arctanh(np.clip(np.exp(total - lt), 0.0, _TANH_CEIL))
    # each output magnitude is mathematically bounded by the smallest other
    # input; clip to that bound so atanh noise never breaks it
    arg = np.argmin(av, axis=1)
    rows = np.arange(av.shape[0])
    min1 = av[rows, arg]
    masked = av.copy()
    masked[rows, arg] = np.inf
    min2 = masked.min(axis=1)
    min_excl = np.broadcast_to(min1[:, None], av.shape).copy()
    min_excl[rows, arg] = min2
    np.minimum(mag, min_excl, out=mag)
    np.minimum(mag, clamp, out=mag)
    sign_all = np.where(zero, 1.0, sign).prod(axis=1, keepdims=True)
    alpha = sign_all * sign * mag
    alpha = np.where((n_zero == 1) & ~zero, 0.0, alpha)
    alpha = np.where(n_zero >= 2, 0.0, alpha)
    return alpha


def cnp_float(values, clamp: float = 25.0) -> np.ndarray:
    """Check-to-variable values for one check node (degree >= 2)."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("check update needs at least two inputs")
    return _cnp_float_rows(values[None, :], clamp)[0]


def _cnp_qspa_rows(codes: np.ndarray, table: np.ndarray,
                   max_pos_code: int) -> np.ndarray:
    """Table-driven check update on a (n_checks, degree) block of codes.

    Output i combines a left fold of inputs before i with a right-to-left
    fold of inputs after i; the shared prefix/suffix arrays keep the lookup
    count at 3d - 6 without changing any fold order.
    """
    n, d = codes.shape
    if d == 1:
        return np.full((n, 1), max_pos_code, dtype=np.uint8)
    prefix = np.empty((n, d - 1), dtype=np.uint8)
    prefix[:, 0] = codes[:, 0]
    for k in range(1, d - 1):
        prefix[:, k] = table[prefix[:, k - 1], codes[:, k]]
    suffix = np.empty((n, d), dtype=np.uint8)
    suffix[:, d - 1] = codes[:, d - 1]
    for k in range(d - 2, 0, -1):
        suffix[:, k] = table[suffix[:, k + 1], codes[:, k]]
    out = np.empty_like(codes)
    out[:, 0] = suffix[:, 1]
    out[:, d - 1] = prefix[:, d - 2]
    for i in range(1, d - 1):
        out[:, i] = table[prefix[:, i - 1], suffix[:, i + 1]]
    return out


def cnp_qspa(codes, lut: PairLut) -> np.ndarray:
    """Table-driven check update for one check node (degree >= 2)."""
    codes = np.asarray(codes, dtype=np.uint8)
    if codes.ndim != 1 or codes.size < 2:
        raise ValueError("check update needs at least two inputs")
    q = lut.quantizer
    return _cnp_qspa_rows(codes[None, :], lut.table, q.max_magnitude_int)[0]


def vnp(channel, incoming, quantizer: Quantizer | None = None):
    """Variable update: each output excludes its own incoming value.

    Float inputs are summed directly.  With a quantizer, inputs are codes:
    the sum runs in two's complement and each output saturates at the
    quantizer range before converting back to sign-magnitude.
    """
    if quantizer is None:
        alpha = np.asarray(incoming, dtype=np.float64)
        return float(channel) + (alpha.sum() - alpha)
    alpha = to_twos_complement(np.asarray(incoming), quantizer)
    total = int(to_twos_complement(channel, quantizer)) + int(alpha.sum())
    return from_twos_complement(total - alpha, quantizer)


def app_decide(channel, incoming, quantizer: Quantizer | None = None):
    """A-posteriori soft value and hard bit; a zero soft value decides 0."""
    if quantizer is None:
        soft = float(channel) + float(np.sum(np.asarray(incoming, dtype=np.float64)))
    else:
        alpha = to_twos_complement(np.asarray(incoming), quantizer)
        soft = int(to_twos_complement(channel, quantizer)) + int(alpha.sum())
    return soft, int(soft < 0)


# ---------------------------------------------------------------------------
# stream decoder


@dataclass(frozen=True)
class DecoderConfig:
    iterations: int
    variant: str = VARIANT_FLOAT
    quantizer: Quantizer | None = None
    clamp: float = 25.0
    audit: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one processor")
        if self.variant not in (VARIANT_FLOAT, VARIANT_QSPA):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == VARIANT_QSPA and self.quantizer is None:
            object.__setattr__(self, "quantizer", Quantizer())


class ProcessorState:
    """Per-processor store: edge messages per resident block row, channel
    LLRs per resident variable block."""

    __slots__ = ("edge_messages", "channel_messages")

    def __init__(self):
        self.edge_messages: dict[int, np.ndarray] = {}
        self.channel_messages: dict[int, np.ndarray] = {}


@dataclass(frozen=True)
class StepOutput:
    block_index: int
    bits: np.ndarray
    soft: np.ndarray


@dataclass(frozen=True)
class StreamResult:
    bits: np.ndarray
    soft: np.ndarray
    syndrome_ok: np.ndarray


class _SlotAudit:
    """Per-step read/write counters over (processor, row, slot)."""

    def __init__(self):
        self.reads: dict = {}
        self.writes: dict = {}
        self.violations: list[str] = []

    def start_step(self):
        self.reads.clear()
        self.writes.clear()

    def count(self, table, kind, proc, row, positions):
        for p in np.asarray(positions).ravel():
            key = (proc, row, int(p))
            n = table.get(key, 0) + 1
            table[key] = n
            if n > 1:
                self.violations.append(f"{kind} x{n} at proc {proc} row {row} slot {p}")

    def read(self, proc, row, positions):
        self.count(self.reads, "read", proc, row, positions)

    def write(self, proc, row, positions):
        self.count(self.writes, "write", proc, row, positions)


class StreamDecoder:
    """Pipeline of I processors over an unterminated convolutional code.

    Decoding step t feeds variable block t; the decision for block w is
    available after step w + (iterations * period), i.e. the pipeline has an
    initial delay of (memory + 1) * iterations decoding steps.
    """

    def __init__(self, code: ConvCode, config: DecoderConfig):
        self.code = code
        self.config = config
        self.quantized = config.variant == VARIANT_QSPA
        if self.quantized:
            self.quantizer = config.quantizer
            self.lut = build_pair_lut(self.quantizer)
            self._table = self.lut.table
            self._max_pos = self.quantizer.max_magnitude_int
        else:
            self.quantizer = None
        self.processors = [ProcessorState() for _ in range(config.iterations)]
        self.output_delay = (code.memory + 1) * config.iterations
        self._shift: list = [None] * config.iterations
        self._t = 0
        self._pending: StepOutput | None = None
        self.audit = _SlotAudit() if config.audit else None

    @property
    def steps_run(self) -> int:
        return self._t

    @property
    def phase(self) -> int:
        """Current time instant modulo the code period."""
        return self._t % self.code.period

    # -- internals ---------------------------------------------------------

    def _deliver(self, proc_idx: int, block: int, lam: np.ndarray,
                 beta_by_offset: list[np.ndarray]):
        """Write an arriving block's channel LLRs and per-edge messages."""
        proc = self.processors[proc_idx]
        proc.channel_messages[block] = lam
        for j, values in enumerate(beta_by_offset):
            row = block + j
            struct = self.code.row_structure(row)
            store = proc.edge_messages.get(row)
            if store is None:
                dtype = np.uint8 if self.quantized else np.float64
                store = np.empty(struct.n_edges, dtype=dtype)
                proc.edge_messages[row] = store
            positions = struct.delta_slices[j][0]
            store[positions] = values
            if self.audit is not None:
                self.audit.write(proc_idx, row, positions)

    def _channel_payload(self, lam: np.ndarray, block: int):
        """Initial messages for a fresh block: every edge carries its bit's LLR."""
        beta = []
        for j in range(self.code.memory + 1):
            struct = self.code.row_structure(block + j)
            cols = struct.delta_slices[j][1]
            beta.append(lam[cols])
        return lam, beta

    def _cnp_rows(self, values: np.ndarray, struct) -> np.ndarray:
        out = np.empty_like(values)
        for deg, _ids, pos in struct.by_degree:
            block = values[pos]
            if self.quantized:
                out[pos] = _cnp_qspa_rows(block, self._table, self._max_pos)
            else:
                out[pos] = _cnp_float_rows(block, self.config.clamp)
        return out

    def step(self, new_llrs: np.ndarray) -> StepOutput | None:
        """One decoding step; returns a decided block once the delay elapsed.

        ``new_llrs`` must hold one block of channel values (codes for the
        quantized variant, floats otherwise).
        """
        new_llrs = np.asarray(new_llrs)
        if new_llrs.shape != (self.code.block_len,):
            raise ValueError(
                f"expected {self.code.block_len} channel values, got {new_llrs.shape}"
            )
        if self.quantized:
            new_llrs = new_llrs.astype(np.uint8)
        else:
            new_llrs = new_llrs.astype(np.float64)
        t0 = self._t
        period = self.code.period
        memory = self.code.memory
        n_proc = self.config.iterations

        # 1) inject the fresh block, shift last step's outputs downstream.
        # These writes are the tail of the previous step's shift-write
        # window, so the per-step slot audit opens after them.
        self._deliver(0, t0, *self._channel_payload(new_llrs, t0))
        for i in range(1, n_proc):
            payload = self._shift[i - 1]
            if payload is not None:
                block, lam, beta = payload
                self._deliver(i, block, lam, beta)
                self._shift[i - 1] = None
        if self.audit is not None:
            self.audit.start_step()

        decision = None
        for i in range(n_proc):
            row = t0 - i * period
            if row < 0:
                break
            proc = self.processors[i]
            struct = self.code.row_structure(row)

            # 2) check update on the entering block row
            store = proc.edge_messages[row]
            if self.audit is not None:
                self.audit.read(i, row, np.arange(struct.n_edges))
            alpha = self._cnp_rows(store, struct)
            leaving = row - memory
            if leaving < 0:
                store[:] = alpha
                if self.audit is not None:
                    self.audit.write(i, row, np.arange(struct.n_edges))
                continue  # nothing leaves yet
            fresh_positions, fresh_cols, _ = struct.delta_slices[memory]
            keep = struct.edge_delta < memory
            store[keep] = alpha[keep]
            if self.audit is not None:
                self.audit.write(i, row, np.flatnonzero(keep))
            fresh_alpha = alpha[fresh_positions]

            # 3) variable update on the leaving block
            lam = proc.channel_messages.pop(leaving)
            pos_list, col_list, alpha_list = [fresh_positions], [fresh_cols], [fresh_alpha]
            for j in range(memory):
                r2 = leaving + j
                s2 = self.code.row_structure(r2)
                positions, cols, _ = s2.delta_slices[j]
                pos_list.append(positions)
                col_list.append(cols)
                alpha_list.append(self.processors[i].edge_messages[r2][positions])
                if self.audit is not None:
                    self.audit.read(i, r2, positions)
            cols = np.concatenate(col_list)
            alphas = np.concatenate(alpha_list)
            if self.quantized:
                a_int = to_twos_complement(alphas, self.quantizer)
                lam_int = to_twos_complement(lam, self.quantizer)
                total = np.zeros(self.code.block_len, dtype=np.int64)
                np.add.at(total, cols, a_int)
                if i + 1 < n_proc:
                    beta_int = lam_int[cols] + total[cols] - a_int
                    beta = from_twos_complement(beta_int, self.quantizer)
                else:
                    soft = lam_int + total
            else:
                total = np.zeros(self.code.block_len, dtype=np.float64)
                np.add.at(total, cols, alphas)
                if i + 1 < n_proc:
                    beta = lam[cols] + total[cols] - alphas
                else:
                    soft = lam + total

            del self.processors[i].edge_messages[leaving]
            if i + 1 < n_proc:
                # regroup per-edge outputs by block offset for the shift;
                # they were assembled offset `memory` first, then 0..memory-1
                split_sizes = [len(p) for p in pos_list]
                chunks = np.split(beta, np.cumsum(split_sizes)[:-1])
                beta_by_offset = chunks[1:] + [chunks[0]]
                self._shift[i] = (leaving, lam, beta_by_offset)
            else:
                bits = (soft < 0).astype(np.uint8)
                decision = StepOutput(block_index=leaving, bits=bits, soft=soft)

        self._t += 1
        out, self._pending = self._pending, decision
        return out


def decoding_step(decoder: StreamDecoder, new_llrs: np.ndarray) -> StepOutput | None:
    """Functional alias for ``StreamDecoder.step``."""
    return decoder.step(new_llrs)


def decode_stream(decoder: StreamDecoder, llr_stream: np.ndarray) -> StreamResult:
    """Decode a finite stream and drain the pipeline with zero-LLR padding.

    The stream length must be a multiple of the block length.  Unlike the
    hardware's continuous operation, the flush pads with erasures (zero
    LLRs) so every fed block is decided.  One syndrome flag is returned per
    block, checking the block row that the block completes.
    """
    llr_stream = np.asarray(llr_stream, dtype=np.float64)
    c = decoder.code.block_len
    if llr_stream.ndim != 1 or llr_stream.size % c != 0:
        raise ValueError(f"stream length must be a multiple of {c}")
    if decoder.steps_run != 0:
        raise ValueError("decode_stream needs a fresh decoder")
    n_blocks = llr_stream.size // c
    if decoder.quantized:
        feed = decoder.quantizer.quantize(llr_stream)
        pad = decoder.quantizer.quantize(np.zeros(c))
        soft_dtype = np.int64
    else:
        feed = llr_stream
        pad = np.zeros(c)
        soft_dtype = np.float64

    outputs: list[StepOutput] = []
    for k in range(n_blocks):
        out = decoder.step(feed[k * c:(k + 1) * c])
        if out is not None:
            outputs.append(out)
    for _ in range(decoder.output_delay):
        out = decoder.step(pad)
        if out is not None:
            outputs.append(out)

    bits = np.zeros(n_blocks * c, dtype=np.uint8)
    soft = np.zeros(n_blocks * c, dtype=soft_dtype)
    for out in outputs:
        if out.block_index < n_blocks:
            sl = slice(out.block_index * c, (out.block_index + 1) * c)
            bits[sl] = out.bits
            soft[sl] = out.soft

    code = decoder.code
    flags = np.zeros(n_blocks, dtype=bool)
    window_cache: dict[int, SparseBinaryMatrix] = {}
    for w in range(n_blocks):
        if w < code.memory:
            key = w
        else:
            key = code.memory + (w - code.memory) % code.period
        win = window_cache.get(key)
        if win is None:
            win = window_matrix(code, key, 1)
            window_cache[key] = win
        lo = max(0, w - code.memory)
        flags[w] = syndrome_check(win, bits[lo * c:(w + 1) * c])
    return StreamResult(bits=bits, soft=soft, syndrome_ok=flags)


# ---------------------------------------------------------------------------
# flooding decoder for the block-code baseline


class BlockDecoder:
    """Standard flooding decoder over an arbitrary parity-check matrix.

    Runs a fixed number of iterations with the same kernels as the stream
    decoder; used to compare a block code against its unwrapped form.
    """

    def __init__(self, matrix: SparseBinaryMatrix, iterations: int,
                 quantizer: Quantizer | None = None, clamp: float = 25.0):
        if iterations < 1:
            raise ValueError("need at least one iteration")
        self.matrix = matrix
        self.iterations = iterations
        self.quantizer = quantizer
        self.clamp = clamp
        if quantizer is not None:
            self.lut = build_pair_lut(quantizer)
        ent = matrix.entries()
        order = np.lexsort((ent[:, 1], ent[:, 0]))
        self.edge_row = ent[order, 0]
        self.edge_col = ent[order, 1]
        degrees = np.bincount(self.edge_row, minlength=matrix.rows)
        self.by_degree = []
        positions = np.arange(self.edge_row.size)
        for deg in sorted(set(degrees.tolist())):
            if deg == 0:
                continue
            ids = np.flatnonzero(degrees == deg)
            mask = np.isin(self.edge_row, ids)
            self.by_degree.append((int(deg), positions[mask].reshape(ids.size, deg)))

    def decode(self, llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Hard decisions and soft a-posteriori values after all iterations."""
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.shape != (self.matrix.cols,):
            raise ValueError(f"expected {self.matrix.cols} channel values")
        q = self.quantizer
        if q is not None:
            lam = to_twos_complement(q.quantize(llrs), q)
            v2c = lam[self.edge_col].astype(np.int64)
            table = self.lut.table
            max_pos = q.max_magnitude_int
        else:
            lam = llrs
            v2c = lam[self.edge_col]
        alpha = None
        for _ in range(self.iterations):
            alpha = np.empty_like(v2c)
            for deg, pos in self.by_degree:
                if q is not None:
                    codes = from_twos_complement(v2c[pos], q)
                    out = _cnp_qspa_rows(codes, table, max_pos)
                    alpha[pos] = to_twos_complement(out, q)
                else:
                    alpha[pos] = _cnp_float_rows(v2c[pos], self.clamp)
            total = np.zeros(self.matrix.cols, dtype=alpha.dtype)
            np.add.at(total, self.edge_col, alpha)
            v2c = lam[self.edge_col] + total[self.edge_col] - alpha
            if q is not None:
                m = q.max_magnitude_int
                v2c = np.clip(v2c, -m, m)
        soft = lam + total
        return (soft < 0).astype(np.uint8), soft
