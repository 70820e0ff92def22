"""Compiled inner loops for the clause bank.

Layout conventions shared with :mod:`tsetlin_news.machine`:

* automaton states are ``uint8`` arrays of shape ``(..., clauses, 2 * o)``;
  literal ``k < o`` is the plain feature ``x_k`` and literal ``o + k`` its
  negation.
* a document is a packed ``uint64`` row of ``ceil(2 * o / 64)`` words where
  bit ``k`` holds the value of literal ``k``.  Padding bits are zero.
* each clause keeps a packed include mask (bit set iff state <= N) that is
  kept in sync with its states by every update routine here.

Every random draw comes from a splitmix64 stream keyed on
``(seed, epoch, document, class, clause)``, so the order in which clauses
are visited never changes the result.
"""

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_INV_2_53 = 1.0 / 9007199254740992.0

_TABLE_BITS = 16
_TABLE_SIZE = 1 << _TABLE_BITS

# class slot used for the per-document non-target draw
SAMPLER_SLOT = 0xFFFFFFFF


@nb.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def stream_key(seed, epoch, index, cls, clause):
    h = _mix64(np.uint64(seed) + _GOLDEN)
    h = _mix64(h ^ np.uint64(epoch))
    h = _mix64(h ^ np.uint64(index))
    h = _mix64(h ^ np.uint64(cls))
    return _mix64(h ^ np.uint64(clause))


@nb.njit(cache=True, inline="always")
def _next64(rs):
    rs[0] += _GOLDEN
    return _mix64(rs[0])


@nb.njit(cache=True, inline="always")
def _to_unit(r):
    return np.float64(r >> np.uint64(11)) * _INV_2_53


@nb.njit(cache=True, inline="always")
def _uniform(rs):
    return _to_unit(_next64(rs))


@nb.njit(cache=True)
def uniform_stream(seed, epoch, index, cls, clause, count):
    rs = np.empty(1, dtype=np.uint64)
    rs[0] = stream_key(seed, epoch, index, cls, clause)
    out = np.empty(count, dtype=np.float64)
    for i in range(count):
        out[i] = _uniform(rs)
    return out


@nb.njit(cache=True, inline="always")
def _gap_of(u, log_q):
    return np.int64(np.floor(np.log1p(-u) / log_q))


@nb.njit(cache=True)
def gap_table(p_event):
    """Inverse-CDF bounds of the geometric gap for each uniform bin.

    Row 0 / row 1 hold the gap at the low / high end of bin ``b``.  When
    they agree every draw in the bin maps to that gap, so the lookup equals
    the closed form exactly; ``log1p`` only runs for straddling bins.
    """
    table = np.full((2, _TABLE_SIZE), -1, dtype=np.int64)
    if p_event <= 0.0 or p_event >= 1.0:
        return table
    log_q = np.log1p(-p_event)
    width = 1.0 / _TABLE_SIZE
    for b in range(_TABLE_SIZE):
        table[0, b] = _gap_of(b * width, log_q)
        table[1, b] = _gap_of((b + 1) * width - _INV_2_53, log_q)
    return table


@nb.njit(cache=True, inline="always")
def _gap(rs, log_q, table):
    r = _next64(rs)
    b = np.int64(r >> np.uint64(64 - _TABLE_BITS))
    lo = table[0, b]
    if lo == table[1, b]:
        return lo
    return _gap_of(_to_unit(r), log_q)


@nb.njit(cache=True)
def gap_stream(seed, p_event, count):
    """Gaps drawn through the table; used to check it against the closed form."""
    table = gap_table(p_event)
    log_q = np.log1p(-p_event)
    rs = np.empty(1, dtype=np.uint64)
    rs[0] = np.uint64(seed)
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        out[i] = _gap(rs, log_q, table)
    return out


@nb.njit(cache=True)
def pack_documents(indptr, indices, n_features, n_words):
    """CSR feature sets -> packed literal rows."""
    n_docs = indptr.shape[0] - 1
    out = np.zeros((n_docs, n_words), dtype=np.uint64)
    for d in range(n_docs):
        row = out[d]
        for k in range(n_features, 2 * n_features):
            row[k >> 6] |= _ONE << np.uint64(k & 63)
        for p in range(indptr[d], indptr[d + 1]):
            k = indices[p]
            row[k >> 6] |= _ONE << np.uint64(k & 63)
            j = n_features + k
            row[j >> 6] &= ~(_ONE << np.uint64(j & 63))
    return out


@nb.njit(cache=True)
def unpack_literals(lits, n_lits):
    out = np.empty(n_lits, dtype=np.uint8)
    for k in range(n_lits):
        out[k] = (lits[k >> 6] >> np.uint64(k & 63)) & _ONE
    return out


@nb.njit(cache=True, inline="always")
def _repack_row(states, include, n_states):
    n_lits = states.shape[0]
    for w in range(include.shape[0]):
        base = w << 6
        stop = min(64, n_lits - base)
        word = np.uint64(0)
        for b in range(stop):
            word |= np.uint64(states[base + b] <= n_states) << np.uint64(b)
        include[w] = word


@nb.njit(cache=True)
def pack_include(states, n_states, n_words):
    """states (rows, 2o) -> include masks (rows, n_words)."""
    rows = states.shape[0]
    out = np.zeros((rows, n_words), dtype=np.uint64)
    for r in range(rows):
        _repack_row(states[r], out[r], n_states)
    return out


@nb.njit(cache=True, inline="always")
def _clause_output(include, lits, train):
    empty = True
    for w in range(include.shape[0]):
        inc = include[w]
        if inc != 0:
            empty = False
            if inc & ~lits[w]:
                return 0
    if empty and not train:
        return 0
    return 1


@nb.njit(cache=True)
def clause_outputs(include, lits, train):
    """Outputs of every clause of one class model on one document."""
    m = include.shape[0]
    out = np.empty(m, dtype=np.uint8)
    for j in range(m):
        out[j] = _clause_output(include[j], lits, train)
    return out


@nb.njit(cache=True)
def class_sums(include, X, train):
    """Vote sums, shape (documents, classes)."""
    n_classes, m, _ = include.shape
    half = m // 2
    out = np.zeros((X.shape[0], n_classes), dtype=np.int32)
    for d in range(X.shape[0]):
        lits = X[d]
        for c in range(n_classes):
            v = 0
            for j in range(m):
                o = _clause_output(include[c, j], lits, train)
                if j < half:
                    v += o
                else:
                    v -= o
            out[d, c] = v
    return out


@nb.njit(cache=True)
def type_i(states, include, litv, n_states, p_event, output, rs, table, scratch):
    """Type I feedback on one clause.

    ``p_event`` is 1/s.  Each literal has an independent Bernoulli(p_event)
    event, drawn by geometric skipping.  With output 1 a 1-valued literal
    steps toward Include on a non-event (probability (s-1)/s) and a 0-valued
    literal steps toward Exclude on an event.  With output 0 every event
    steps toward Exclude.  ``scratch`` is a zeroed uint8 buffer of length
    2o and is left zeroed on return.
    """
    n_lits = states.shape[0]
    top = 2 * n_states
    every = p_event >= 1.0
    if p_event <= 0.0:
        nxt = n_lits
        log_q = 0.0
    elif every:
        nxt = 0
        log_q = 0.0
    else:
        log_q = np.log1p(-p_event)
        nxt = _gap(rs, log_q, table)

    if not output:
        while nxt < n_lits:
            s = states[nxt]
            if s < top:
                states[nxt] = s + 1
                if s == n_states:
                    include[nxt >> 6] &= ~(_ONE << np.uint64(nxt & 63))
            nxt += 1 if every else 1 + _gap(rs, log_q, table)
        return

    first = nxt
    while nxt < n_lits:
        scratch[nxt] = 1
        nxt += 1 if every else 1 + _gap(rs, log_q, table)
    for k in range(n_lits):
        s = states[k]
        lv = litv[k]
        ev = scratch[k]
        down = lv & (ev ^ 1) & (s > 1)
        up = (lv ^ 1) & ev & (s < top)
        states[k] = s - down + up
    for k in range(first, n_lits):
        scratch[k] = 0
    _repack_row(states, include, n_states)


@nb.njit(cache=True)
def type_ii(states, include, litv, n_states, output):
    """Type II feedback: excluded 0-valued literals step toward Include."""
    if not output:
        return
    for k in range(states.shape[0]):
        s = states[k]
        states[k] = s - ((litv[k] ^ 1) & (s > n_states))
    _repack_row(states, include, n_states)


@nb.njit(cache=True)
def update_class(states, include, lits, litv, n_states, T, p_event, is_target,
                 seed, epoch, index, cls, alloc, table, scratch):
    """Allocate and apply feedback to one class model for one document.

    Clause outputs and the vote sum are a snapshot taken before any update.
    Returns the unclamped train-mode vote sum.  ``alloc[j]`` receives
    0 (none), 1 (Type I) or 2 (Type II).
    """
    m = states.shape[0]
    half = m // 2
    outs = np.empty(m, dtype=np.uint8)
    v = 0
    for j in range(m):
        o = _clause_output(include[j], lits, True)
        outs[j] = o
        if j < half:
            v += o
        else:
            v -= o
    vc = min(max(v, -T), T)
    if is_target:
        prob = (T - vc) / (2.0 * T)
    else:
        prob = (T + vc) / (2.0 * T)
    rs = np.empty(1, dtype=np.uint64)
    for j in range(m):
        rs[0] = stream_key(seed, epoch, index, cls, j)
        if _uniform(rs) >= prob:
            alloc[j] = 0
        elif (j < half) == is_target:
            alloc[j] = 1
            type_i(states[j], include[j], litv, n_states, p_event, outs[j],
                   rs, table, scratch)
        else:
            alloc[j] = 2
            type_ii(states[j], include[j], litv, n_states, outs[j])
    return v


@nb.njit(cache=True)
def pick_other_class(seed, epoch, index, y, n_classes):
    if n_classes == 2:
        return 1 - y
    rs = np.empty(1, dtype=np.uint64)
    rs[0] = stream_key(seed, epoch, index, SAMPLER_SLOT, 0)
    c = np.int64(_uniform(rs) * (n_classes - 1))
    if c >= y:
        c += 1
    return c


@nb.njit(cache=True)
def train_step(states, include, lits, y, n_states, T, p_event, seed, epoch,
               index, table, alloc):
    """One document: target-class update then one sampled non-target update.

    ``alloc`` has shape (2, m): row 0 for the target, row 1 for the other
    class.  Returns the non-target class id.
    """
    n_lits = states.shape[2]
    litv = unpack_literals(lits, n_lits)
    scratch = np.zeros(n_lits, dtype=np.uint8)
    update_class(states[y], include[y], lits, litv, n_states, T, p_event,
                 True, seed, epoch, index, y, alloc[0], table, scratch)
    other = pick_other_class(seed, epoch, index, y, states.shape[0])
    update_class(states[other], include[other], lits, litv, n_states, T,
                 p_event, False, seed, epoch, index, other, alloc[1], table,
                 scratch)
    return other


@nb.njit(cache=True)
def train_epoch(states, include, X, y, order, n_states, T, p_event, seed,
                epoch, table):
    m = states.shape[1]
    alloc = np.empty((2, m), dtype=np.uint8)
    for i in range(order.shape[0]):
        d = order[i]
        train_step(states, include, X[d], y[d], n_states, T, p_event, seed,
                   epoch, d, table, alloc)
