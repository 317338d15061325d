"""Classical key distillation: QBER sampling, parity-exchange error
correction and Toeplitz-hash privacy amplification.

Keys are bit strings of '0'/'1'.  Leakage is counted in disclosed bits
and only ever grows along the pipeline; the final key length follows
m = floor(n*(1-h2(qber))) - leaked - ceil(2*log2(1/epsilon)).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np


class KeyStage(Enum):
    RAW = "raw"
    SIFTED = "sifted"
    RECONCILED = "reconciled"
    FINAL = "final"


@dataclass(frozen=True)
class KeyMaterial:
    stage: KeyStage
    bits: str
    leaked_bits: int = 0

    def __post_init__(self):
        if self.leaked_bits < 0:
            raise ValueError("leaked_bits must be non-negative")
        if any(c not in "01" for c in self.bits):
            raise ValueError("bits must be a string of 0/1")

    def advanced(self, stage: KeyStage, bits: str, extra_leaked: int = 0) -> "KeyMaterial":
        """Next pipeline stage; leakage is cumulative."""
        return KeyMaterial(stage, bits, self.leaked_bits + extra_leaked)


def format_key_hex(key: KeyMaterial) -> str:
    """Lowercase hex export with a stage header line.

    Bits are padded with zeros to a whole number of nibbles; the header
    records the true bit length.
    """
    n = len(key.bits)
    header = f"stage={key.stage.value} bits={n} leaked={key.leaked_bits}"
    if n == 0:
        return header + "\n"
    padded = key.bits + "0" * (-n % 4)
    hexstr = "".join(f"{int(padded[i:i + 4], 2):x}" for i in range(0, len(padded), 4))
    return header + "\n" + hexstr + "\n"


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def estimate_qber(alice: str, bob: str, sample_fraction: float, rng: np.random.Generator):
    """Disclose a uniform random sample and compare it.

    Returns (qber, alice_rest, bob_rest); the sampled positions are
    removed from both keys and count as leaked on the caller's ledger.
    """
    if len(alice) != len(bob):
        raise ValueError("keys must have equal length")
    n = len(alice)
    k = int(sample_fraction * n)
    if k < 1:
        raise ValueError("sample is empty; raise sample_fraction or key length")
    picked = set(rng.choice(n, size=k, replace=False).tolist())
    errors = sum(1 for i in picked if alice[i] != bob[i])
    alice_rest = "".join(alice[i] for i in range(n) if i not in picked)
    bob_rest = "".join(bob[i] for i in range(n) if i not in picked)
    return errors / k, alice_rest, bob_rest


def _parity(bits: np.ndarray, idx: np.ndarray) -> int:
    return int(np.sum(bits[idx]) & 1)


def _binary_search(alice: np.ndarray, bob: np.ndarray, block: np.ndarray):
    """Locate one error inside a block with odd parity mismatch.

    Returns (position, parities_disclosed): each halving discloses one
    of Alice's sub-block parities.
    """
    disclosed = 0
    while len(block) > 1:
        half = block[: len(block) // 2]
        disclosed += 1
        if _parity(alice, half) != _parity(bob, half):
            block = half
        else:
            block = block[len(block) // 2:]
    return int(block[0]), disclosed


def reconcile(alice: str, bob: str, passes: int = 2, initial_block: int = 8, seed: int = 0):
    """Parity-exchange reconciliation with cascading back-search.

    Each pass partitions the key into blocks of `initial_block` bits
    (pass 1 in natural order, later passes under a seeded shuffle) and
    discloses one parity per block.  A mismatched block is binary
    searched down to a single bit, which is flipped in Bob's key; the
    flip re-opens the blocks containing that bit in every other pass,
    so corrections cascade until all disclosed parities agree.

    Returns (corrected_bob, leaked) where leaked counts every disclosed
    parity.  Residual errors (even-weight patterns aligned in all
    partitions) remain in the output rather than being hidden.
    """
    if len(alice) != len(bob):
        raise ValueError("keys must have equal length")
    n = len(alice)
    if n == 0:
        return bob, 0
    if initial_block < 1:
        raise ValueError("initial_block must be >= 1")
    a = np.frombuffer(alice.encode(), dtype=np.uint8) - ord("0")
    b = (np.frombuffer(bob.encode(), dtype=np.uint8) - ord("0")).copy()
    rng = np.random.default_rng(seed)
    leaked = 0
    partitions: list[list[np.ndarray]] = []
    block_of: list[np.ndarray] = []  # per pass: position -> block index
    queue: deque[tuple[int, int]] = deque()
    for p in range(passes):
        order = np.arange(n) if p == 0 else rng.permutation(n)
        blocks = [order[i:i + initial_block] for i in range(0, n, initial_block)]
        partitions.append(blocks)
        lookup = np.empty(n, dtype=np.int64)
        lookup[order] = np.arange(n) // initial_block
        block_of.append(lookup)
        starts = np.arange(0, n, initial_block)
        a_par = np.add.reduceat(a[order], starts) & 1
        b_par = np.add.reduceat(b[order], starts) & 1
        leaked += len(blocks)
        for bi in np.nonzero(a_par != b_par)[0]:
            queue.append((p, int(bi)))
        while queue:
            pi, bi = queue.popleft()
            block = partitions[pi][bi]
            if _parity(a, block) == _parity(b, block):
                continue  # stale entry, fixed by an earlier cascade
            pos, disclosed = _binary_search(a, b, block)
            leaked += disclosed
            b[pos] ^= 1
            for qi in range(len(partitions)):
                if qi == pi:
                    continue
                qblock = partitions[qi][block_of[qi][pos]]
                if _parity(a, qblock) != _parity(b, qblock):
                    queue.append((qi, int(block_of[qi][pos])))
    corrected = "".join("01"[v] for v in b)
    return corrected, leaked


def final_key_length(n: int, qber: float, leaked: int, epsilon: float) -> int:
    """Distillable length after hashing: entropy of the key minus the
    disclosed information minus a 2*log2(1/epsilon) security margin."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must be in (0, 1]")
    margin = math.ceil(2 * math.log2(1 / epsilon))
    return max(0, math.floor(n * (1 - binary_entropy(qber))) - leaked - margin)


def privacy_amplify(key: str, leaked: int, qber: float, epsilon: float, seed: int) -> str:
    """Compress a partially disclosed key with a seeded Toeplitz hash.

    The output is T @ key mod 2 for a random m x n binary Toeplitz
    matrix T drawn from the seed, with m = final_key_length(...).  The
    map is linear in the key, so parties holding identical inputs and
    the same seed end with identical final keys.
    """
    if not key:
        raise ValueError("key must be non-empty")
    n = len(key)
    m = final_key_length(n, qber, leaked, epsilon)
    if m == 0:
        return ""
    rng = np.random.default_rng(seed)
    diagonals = rng.integers(0, 2, size=m + n - 1, dtype=np.int64)
    bits = (np.frombuffer(key.encode(), dtype=np.uint8) - ord("0")).astype(np.int64)
    # T[i, j] = diagonals[i - j + n - 1], so T @ bits is a slice of the
    # full convolution; exact integer arithmetic, no dense matrix.
    out = np.convolve(diagonals, bits)[n - 1:n - 1 + m] & 1
    return "".join("01"[v] for v in out)
