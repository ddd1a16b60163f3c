"""Compiled kernels for the trial-level Monte Carlo simulators.

Everything operates on bit-packed GF(2) data: a Pauli pattern over n pair
slots is one uint64 with x/z bits interleaved (bit 2i = x of slot i, bit
2i+1 = z), and a symplectic group element is the 2n uint64 images of the
basis patterns X_0, Z_0, X_1, Z_1, ...

Randomness is a counter-based splitmix64 stream derived from (seed, trial
index), so results are bit-identical for a given seed regardless of how
trials are scheduled across threads; per-trial outputs are written to
per-trial array slots and reduced by the caller.
"""

import numpy as np
from numba import njit, prange, uint64

U0 = uint64(0)
U1 = uint64(1)
MASK64 = uint64(0xFFFFFFFFFFFFFFFF)
GOLDEN = uint64(0x9E3779B97F4A7C15)
MIX1 = uint64(0xBF58476D1CE4E5B9)
MIX2 = uint64(0x94D049BB133111EB)
TRIAL_SALT = uint64(0xD1342543DE82EF95)
EVEN_BITS = uint64(0x5555555555555555)
ODD_BITS = uint64(0xAAAAAAAAAAAAAAAA)
INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> uint64(30))) * MIX1
    z = (z ^ (z >> uint64(27))) * MIX2
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def stream_init(seed, trial):
    return _mix(uint64(seed) + GOLDEN) ^ _mix(uint64(trial) * TRIAL_SALT + GOLDEN)


@njit(cache=True, inline="always")
def next_u64(state):
    state = state + GOLDEN
    return _mix(state), state


@njit(cache=True, inline="always")
def next_f64(state):
    x, state = next_u64(state)
    return (x >> uint64(11)) * INV_2_53, state


@njit(cache=True, inline="always")
def next_below(state, bound):
    """Uniform uint64 in [0, bound) via masked rejection (exactly uniform)."""
    if bound <= U1:
        return U0, state
    mask = bound - U1
    mask |= mask >> uint64(1)
    mask |= mask >> uint64(2)
    mask |= mask >> uint64(4)
    mask |= mask >> uint64(8)
    mask |= mask >> uint64(16)
    mask |= mask >> uint64(32)
    while True:
        x, state = next_u64(state)
        x &= mask
        if x < bound:
            return x, state


@njit(cache=True, inline="always")
def _parity(x):
    x ^= x >> uint64(32)
    x ^= x >> uint64(16)
    x ^= x >> uint64(8)
    x ^= x >> uint64(4)
    x ^= x >> uint64(2)
    x ^= x >> uint64(1)
    return x & U1


@njit(cache=True, inline="always")
def sympl_inner(u, v):
    """Symplectic inner product in the interleaved layout: swap each (x, z)
    bit pair of v, then take the parity of the AND with u."""
    swapped = ((v & EVEN_BITS) << uint64(1)) | ((v & ODD_BITS) >> uint64(1))
    return _parity(u & swapped)


@njit(cache=True, inline="always")
def transvect(h, v):
    """v -> v + <h, v> h; h = 0 is the identity."""
    if sympl_inner(h, v) == U1:
        return v ^ h
    return v


@njit(cache=True)
def find_transvection(x, y, npairs):
    """Vectors (h0, h1), possibly zero, with T_h1(T_h0(x)) = y for nonzero x, y."""
    if x == y:
        return U0, U0
    if sympl_inner(x, y) == U1:
        return x ^ y, U0
    # commuting and distinct: find z anticommuting with both, route x -> z -> y
    for i in range(npairs):
        shift = uint64(2 * i)
        xi = (x >> shift) & uint64(3)
        yi = (y >> shift) & uint64(3)
        if xi != U0 and yi != U0:
            zi = xi ^ yi
            if zi == U0:
                # identical nonzero site: pick any site value anticommuting with it
                zi = uint64(2)
                if (xi & U1) != ((xi >> uint64(1)) & U1):
                    zi |= U1
            z = zi << shift
            return x ^ z, y ^ z
    # supports are disjoint: one site from x, one from y
    z = U0
    for i in range(npairs):
        shift = uint64(2 * i)
        xi = (x >> shift) & uint64(3)
        yi = (y >> shift) & uint64(3)
        if xi != U0 and yi == U0:
            if (xi & U1) == ((xi >> uint64(1)) & U1):
                zi = uint64(2)
            else:
                zi = ((xi & U1) << uint64(1)) | ((xi >> uint64(1)) & U1)
            z |= zi << shift
            break
    for i in range(npairs):
        shift = uint64(2 * i)
        xi = (x >> shift) & uint64(3)
        yi = (y >> shift) & uint64(3)
        if xi == U0 and yi != U0:
            if (yi & U1) == ((yi >> uint64(1)) & U1):
                zi = uint64(2)
            else:
                zi = ((yi & U1) << uint64(1)) | ((yi >> uint64(1)) & U1)
            z |= zi << shift
            break
    return x ^ z, y ^ z


@njit(cache=True)
def build_rows(n, ks, bs, rows):
    """Assemble a symplectic group element from its per-level draws.

    ks[level-1] in [1, 4^level - 1] selects the image of the first basis
    vector at that block size, bs[level-1] in [0, 2^(2*level-1)) the remaining
    freedom.  Levels are applied innermost first; rows receives the 2n packed
    basis images.
    """
    rows[0] = U1
    rows[1] = uint64(2)
    for level in range(1, n + 1):
        if level > 1:
            for j in range(2 * (level - 1) - 1, -1, -1):
                rows[j + 2] = rows[j] << uint64(2)
            rows[0] = U1
            rows[1] = uint64(2)
        nn = 2 * level
        f1 = ks[level - 1]
        b = bs[level - 1]
        t0, t1 = find_transvection(U1, f1, level)
        eprime = U1 | ((b >> uint64(1)) << uint64(2))
        h0 = transvect(t0, eprime)
        h0 = transvect(t1, h0)
        if b & U1:
            f1 = U0
        for j in range(nn):
            r = rows[j]
            r = transvect(t0, r)
            r = transvect(t1, r)
            r = transvect(h0, r)
            r = transvect(f1, r)
            rows[j] = r


@njit(cache=True, inline="always")
def draw_group_element(state, n, rows):
    """Draw the per-level freedoms (levels 1..n, k then b) and build rows."""
    ks = np.empty(n, dtype=np.uint64)
    bs = np.empty(n, dtype=np.uint64)
    for level in range(1, n + 1):
        if level >= 32:
            nonzero = MASK64
        else:
            nonzero = (U1 << uint64(2 * level)) - U1
        k, state = next_below(state, nonzero)
        ks[level - 1] = k + U1
        b, state = next_below(state, U1 << uint64(2 * level - 1))
        bs[level - 1] = b
    build_rows(n, ks, bs, rows)
    return state


@njit(cache=True, inline="always")
def apply_rows(rows, packed):
    out = U0
    v = packed
    j = 0
    while v != U0:
        if v & U1:
            out ^= rows[j]
        v >>= U1
        j += 1
    return out


@njit(cache=True, inline="always")
def sample_depolarized_frame(state, n, eps):
    """Slot-wise IID error: with probability eps a uniform X/Y/Z, else identity."""
    packed = U0
    for slot in range(n):
        u, state = next_f64(state)
        if u < eps:
            r, state = next_below(state, uint64(3))
            if r == U0:
                site = U1  # X
            elif r == U1:
                site = uint64(3)  # Y
            else:
                site = uint64(2)  # Z
            packed |= site << uint64(2 * slot)
    return packed, state


@njit(cache=True, inline="always")
def _x_mask_first(m):
    """Mask selecting the x bits of slots 0..m-1 in the interleaved layout."""
    return EVEN_BITS & ((U1 << uint64(2 * m)) - U1)


@njit(cache=True, parallel=True)
def passive_trials(n, m, eps, trials, seed, out_accept, out_phi):
    syn_mask = _x_mask_first(m)
    shift_out = uint64(2 * m)
    for t in prange(trials):
        state = stream_init(seed, t)
        rows = np.empty(2 * n, dtype=np.uint64)
        state = draw_group_element(state, n, rows)
        frame, state = sample_depolarized_frame(state, n, eps)
        image = apply_rows(rows, frame)
        accept = (image & syn_mask) == U0
        out_accept[t] = 1 if accept else 0
        out_phi[t] = 1 if (accept and (image >> shift_out) == U0) else 0


@njit(cache=True, inline="always")
def _syndrome_of(image, m):
    syn = U0
    for i in range(m):
        syn |= ((image >> uint64(2 * i)) & U1) << uint64(i)
    return syn


@njit(cache=True, parallel=True)
def active_trials(n, m, eps, err_packed, trials, seed, out_accept, out_phi):
    shift_out = uint64(2 * m)
    n_table = err_packed.shape[0]
    for t in prange(trials):
        state = stream_init(seed, t)
        rows = np.empty(2 * n, dtype=np.uint64)
        state = draw_group_element(state, n, rows)
        # most-likely-first decoder table for this group element
        corrections = np.full(1 << m, MASK64, dtype=np.uint64)
        filled = np.zeros(1 << m, dtype=np.uint8)
        for idx in range(n_table):
            entry_image = apply_rows(rows, err_packed[idx])
            syn = _syndrome_of(entry_image, m)
            if filled[syn] == 0:
                filled[syn] = 1
                corrections[syn] = entry_image
        frame, state = sample_depolarized_frame(state, n, eps)
        image = apply_rows(rows, frame)
        syn = _syndrome_of(image, m)
        if filled[syn] == 0:
            out_accept[t] = 0
            out_phi[t] = 0
        else:
            residual = image ^ corrections[syn]
            out_accept[t] = 1
            out_phi[t] = 1 if (residual >> shift_out) == U0 else 0


@njit(cache=True, inline="always")
def _site_pair(frame, i, j):
    return ((frame >> uint64(2 * i)) & uint64(3)) | (((frame >> uint64(2 * j)) & uint64(3)) << uint64(2))


@njit(cache=True, inline="always")
def _write_site_pair(frame, i, j, sub):
    frame &= ~((uint64(3) << uint64(2 * i)) | (uint64(3) << uint64(2 * j)))
    frame |= (sub & uint64(3)) << uint64(2 * i)
    frame |= ((sub >> uint64(2)) & uint64(3)) << uint64(2 * j)
    return frame


@njit(cache=True, inline="always")
def _two_slot_noise_hits(state, frame, i, j, lam):
    """Both halves of the gate suffer independent depolarizing hits: each one,
    with probability lam, multiplies the two-slot sub-pattern by a uniform
    non-identity two-qubit Pauli."""
    for _ in range(2):
        u, state = next_f64(state)
        if u < lam:
            r, state = next_below(state, uint64(15))
            sub = r + U1
            frame ^= (sub & uint64(3)) << uint64(2 * i)
            frame ^= ((sub >> uint64(2)) & uint64(3)) << uint64(2 * j)
    return frame, state


@njit(cache=True, parallel=True)
def finite_depth_trials(n, m, gates, eps, lam, trials, seed, out_accept, out_phi, out_weight):
    syn_mask = _x_mask_first(m)
    shift_out = uint64(2 * m)
    for t in prange(trials):
        state = stream_init(seed, t)
        frame, state = sample_depolarized_frame(state, n, eps)
        for _ in range(gates):
            a, state = next_below(state, uint64(n))
            b, state = next_below(state, uint64(n - 1))
            if b >= a:
                b += U1
            i = int(a)
            j = int(b)
            frame, state = _two_slot_noise_hits(state, frame, i, j, lam)
            sub = _site_pair(frame, i, j)
            if sub != U0:
                r, state = next_below(state, uint64(15))
                frame = _write_site_pair(frame, i, j, r + U1)
        weight = 0
        for slot in range(n):
            if (frame >> uint64(2 * slot)) & uint64(3) != U0:
                weight += 1
        out_weight[t] = weight
        accept = (frame & syn_mask) == U0
        out_accept[t] = 1 if accept else 0
        out_phi[t] = 1 if (accept and (frame >> shift_out) == U0) else 0


@njit(cache=True)
def group_element_census(n, trials, seed, out_index):
    """Sampled group elements flattened to an integer index (row bits stacked);
    only meaningful for n = 1 where rows fit in 4 bits."""
    rows = np.empty(2 * n, dtype=np.uint64)
    nn = 2 * n
    for t in range(trials):
        state = stream_init(seed, t)
        draw_group_element(state, n, rows)
        idx = U0
        for j in range(nn):
            idx |= rows[j] << uint64(nn * j)
        out_index[t] = idx


@njit(cache=True)
def orbit_census(n, frame_packed, trials, seed, out_image):
    """Image of a fixed pattern under freshly sampled group elements."""
    rows = np.empty(2 * n, dtype=np.uint64)
    for t in range(trials):
        state = stream_init(seed, t)
        draw_group_element(state, n, rows)
        out_image[t] = apply_rows(rows, frame_packed)


@njit(cache=True)
def syndrome_collision_census(n, m, packed_a, packed_b, trials, seed):
    """How often two fixed patterns acquire identical syndromes under a shared
    random group element."""
    rows = np.empty(2 * n, dtype=np.uint64)
    hits = 0
    for t in range(trials):
        state = stream_init(seed, t)
        draw_group_element(state, n, rows)
        syn_a = _syndrome_of(apply_rows(rows, packed_a), m)
        syn_b = _syndrome_of(apply_rows(rows, packed_b), m)
        if syn_a == syn_b:
            hits += 1
    return hits


@njit(cache=True)
def gate_noise_return_census(lam, start_class, trials, seed):
    """Empirical probability that the two per-gate noise hits return a two-slot
    pattern of the given class (0: clean, 1: one errored slot, 2: both) to the
    clean pattern; estimates the chain's f0/f1/f2."""
    hits = 0
    for t in range(trials):
        state = stream_init(seed, t)
        frame = U0
        if start_class == 1:
            r, state = next_below(state, uint64(3))
            frame = (r + U1) << uint64(2)
        elif start_class == 2:
            r, state = next_below(state, uint64(3))
            frame = r + U1
            r, state = next_below(state, uint64(3))
            frame |= (r + U1) << uint64(2)
        frame, state = _two_slot_noise_hits(state, frame, 0, 1, lam)
        if frame == U0:
            hits += 1
    return hits
