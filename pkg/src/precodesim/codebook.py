"""Lloyd-trained digital precoding codebook and greedy codeword selection.

The codebook holds B = 2^b unit-norm vectors of RF-chain dimension, shared
by transmitter and receiver.  Training runs Lloyd iterations under the
chordal distance d(u, v)^2 = 1 - |u^H v|^2 (phase-invariant); the centroid
of a cell is the principal eigenvector of its sample outer-product sum.

Per-subcarrier selection is greedy: each stream takes the codeword with
the largest projected channel gain, then the channel is projected onto the
orthogonal complement of everything selected so far.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .beams import analog_beamformers, effective_channel
from .channel import SystemConfig, delay_taps, draw_paths, to_frequency

DEPENDENCE_TOL = 1e-10  # candidates below this residual are numerically spanned

TRAINING_DECIMATION = 16  # keep every 16th subcarrier when harvesting training data


@dataclass
class Codebook:
    vectors: np.ndarray  # (B, dim) complex unit rows
    bits: int
    distortion_history: tuple = ()  # per-iteration training distortion, if trained

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]

    def validate(self):
        if len(self) != 2 ** self.bits:
            raise ValueError("codebook size must equal 2^bits")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("codewords must be unit norm")
        if len(np.unique(self.vectors, axis=0)) != len(self):
            raise ValueError("codewords must be distinct")


@dataclass
class DigitalPrecoder:
    matrix: np.ndarray            # (dim, N_s), columns are codewords
    codeword_indices: np.ndarray  # (N_s,) int
    eval_count: int = 0           # projected-gain evaluations spent selecting


def dominant_right_singular(h_stack: np.ndarray) -> np.ndarray:
    """Dominant right-singular vector of every matrix in the stack."""
    _, _, vh = np.linalg.svd(h_stack)
    return vh[..., 0, :].conj()


def training_set(config: SystemConfig, num_realizations: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Harvest unit training vectors from independent offline channel draws.

    For each draw, the dominant right-singular vector of the effective
    channel is taken on a decimated subcarrier grid (every 16th), which
    keeps the set diverse but bounded.
    """
    positions = np.arange(0, config.num_subcarriers, TRAINING_DECIMATION)
    vectors = []
    for _ in range(num_realizations):
        paths = draw_paths(config, rng)
        taps = delay_taps(paths, config)
        freq = to_frequency(taps, config.num_subcarriers, positions)
        beams = analog_beamformers(paths, config)
        h_eff = effective_channel(freq, beams)
        vectors.append(dominant_right_singular(h_eff))
    if not vectors:
        return np.zeros((0, config.num_tx_rf), dtype=complex)
    return np.concatenate(vectors, axis=0)


def _chordal_assign(training: np.ndarray, codewords: np.ndarray):
    """Nearest codeword per sample and the mean chordal distortion."""
    overlap = np.abs(training @ codewords.conj().T) ** 2  # (N, B)
    assign = np.argmax(overlap, axis=1)
    distortion = float(np.mean(1.0 - np.max(overlap, axis=1)))
    return assign, distortion


def _principal_direction(samples: np.ndarray) -> np.ndarray:
    if samples.shape[0] == 1:
        return samples[0].copy()
    gram = samples.T @ samples.conj()  # sum of outer products x x^H
    _, vecs = np.linalg.eigh(gram)
    direction = vecs[:, -1]
    return direction / np.linalg.norm(direction)


def train_lloyd(training_vectors: np.ndarray, bits: int, rng: np.random.Generator,
                max_iters: int = 100, tol: float = 1e-9) -> Codebook:
    """Lloyd iterations on the unit sphere under the chordal distance.

    Starts from a random subset of the training set, alternates
    nearest-codeword assignment with principal-eigenvector centroid
    updates, and stops when the mean distortion improves by less than
    ``tol``.  Empty cells are re-seeded with the training vector farthest
    from its current centroid, which preserves monotonicity.
    """
    training = np.asarray(training_vectors)
    size = 2 ** bits
    if training.shape[0] < size:
        raise ValueError(f"need at least {size} training vectors, got {training.shape[0]}")
    codewords = training[rng.choice(training.shape[0], size=size, replace=False)].copy()
    history = []
    previous = None
    for _ in range(max_iters):
        assign, distortion = _chordal_assign(training, codewords)
        history.append(distortion)
        if previous is not None and previous - distortion < tol:
            break
        previous = distortion
        per_sample = 1.0 - np.abs(np.sum(training * codewords[assign].conj(), axis=1)) ** 2
        reseed_order = np.argsort(-per_sample, kind="stable")
        reseed_at = 0
        for j in range(size):
            members = training[assign == j]
            if members.shape[0] == 0:
                codewords[j] = training[reseed_order[reseed_at]]
                reseed_at += 1
            else:
                codewords[j] = _principal_direction(members)
    return Codebook(vectors=codewords, bits=bits, distortion_history=tuple(history))


def greedy_select(h_stack: np.ndarray, codewords: np.ndarray, num_streams: int):
    """Greedy projected codeword selection over a stack of channels.

    ``h_stack`` has shape (n, r, dim); one independent selection runs per
    leading entry.  Returns (indices (n, num_streams), eval_count) where
    every round scores all B codewords (selected and numerically spanned
    candidates are masked from the argmax but still count as evaluations).
    """
    h_stack = np.asarray(h_stack, dtype=complex)
    single = h_stack.ndim == 2
    if single:
        h_stack = h_stack[None]
    n, _, dim = h_stack.shape
    num_codewords = codewords.shape[0]
    if num_streams > num_codewords:
        raise ValueError("cannot select more streams than codewords")
    if num_streams > dim:
        raise ValueError("cannot select more streams than the codeword dimension")
    projected = h_stack.copy()
    blocked = np.zeros((n, num_codewords), dtype=bool)
    residual = np.broadcast_to(codewords, (n, num_codewords, dim)).copy()
    chosen = np.zeros((n, num_streams), dtype=int)
    evals = 0
    rows = np.arange(n)
    for t in range(num_streams):
        gains = np.sum(np.abs(projected @ codewords.T) ** 2, axis=1)  # (n, B)
        evals += n * num_codewords
        if np.any(np.all(blocked, axis=1)):
            raise RuntimeError("no selectable codeword left (all numerically spanned)")
        gains[blocked] = -1.0
        pick = np.argmax(gains, axis=1)
        chosen[:, t] = pick
        blocked[rows, pick] = True
        # Grow the orthonormal basis by the residual of the picked codeword,
        # then project the channel and all candidate residuals off it.
        direction = residual[rows, pick]
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        direction = direction / np.maximum(norms, 1e-300)
        projected -= (projected @ direction[:, :, None]) @ direction[:, None, :].conj()
        residual -= (residual @ direction[:, :, None].conj()) @ direction[:, None, :]
        blocked |= np.linalg.norm(residual, axis=2) < DEPENDENCE_TOL
    indices = chosen[0] if single else chosen
    return indices, evals


def select_codewords(h_eff_k: np.ndarray, codebook: Codebook,
                     num_streams: int) -> DigitalPrecoder:
    """Greedy multi-stream codeword selection for one subcarrier."""
    indices, evals = greedy_select(h_eff_k, codebook.vectors, num_streams)
    matrix = codebook.vectors[indices].T.copy()
    return DigitalPrecoder(matrix=matrix, codeword_indices=indices, eval_count=evals)


# --- serialization ---------------------------------------------------------

def save_codebook(codebook: Codebook, path):
    """Flat text format: header ``bits dim``, one codeword per line as
    interleaved real/imag decimals.  repr() round-trips floats bit-exactly."""
    lines = [f"{codebook.bits} {codebook.dim}"]
    for row in codebook.vectors:
        parts = []
        for value in row:
            parts.append(repr(float(value.real)))
            parts.append(repr(float(value.imag)))
        lines.append(" ".join(parts))
    Path(path).write_text("\n".join(lines) + "\n")


def load_codebook(path) -> Codebook:
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty codebook file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: header must be 'bits dim'")
    bits, dim = int(header[0]), int(header[1])
    rows = []
    for line in lines[1:]:
        values = [float(part) for part in line.split()]
        if len(values) != 2 * dim:
            raise ValueError(f"{path}: expected {2 * dim} decimals per codeword line")
        flat = np.asarray(values).reshape(dim, 2)
        rows.append(flat[:, 0] + 1j * flat[:, 1])
    codebook = Codebook(vectors=np.asarray(rows), bits=bits)
    codebook.validate()
    return codebook
