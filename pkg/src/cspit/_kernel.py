"""Compiled event loop of the CS-PIT simulator.

All state lives in flat numpy arrays owned by the caller so a run can be
suspended whenever the random-number buffers run dry and resumed after a
refill. Contents are 0-based here.
"""
import numpy as np
from numba import njit

# indices into the scalar state vector ``sc`` (float64)
CLOCK, POS, SEEN, COUNTED, CS_HEAD, CS_TAIL, CS_SIZE, FL_HEAD, FL_TAIL, FL_SIZE, \
    CQ_HEAD, CQ_LEN, FWD_ALL, DONE_ALL, COUNTING = range(15)
N_SCALARS = 15

STATUS_DONE = 0
STATUS_REFILL = 1


@njit(cache=True)
def _sift_down(ht, hk, n, i):
    t, k = ht[i], hk[i]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and (ht[c + 1] < ht[c] or (ht[c + 1] == ht[c] and hk[c + 1] < hk[c])):
            c += 1
        if ht[c] < t or (ht[c] == t and hk[c] < k):
            ht[i], hk[i] = ht[c], hk[c]
            i = c
        else:
            break
    ht[i], hk[i] = t, k


@njit(cache=True)
def _unlink(prev, nxt, k, head, tail):
    p, n = prev[k], nxt[k]
    if p >= 0:
        nxt[p] = n
    else:
        head = n
    if n >= 0:
        prev[n] = p
    else:
        tail = p
    prev[k] = -1
    nxt[k] = -1
    return head, tail


@njit(cache=True)
def _push_front(prev, nxt, k, head, tail):
    prev[k] = -1
    nxt[k] = head
    if head >= 0:
        prev[head] = k
    else:
        tail = k
    return k, tail


@njit(cache=True)
def run_events(sc, ht, hk, w1, mu1, mu2, ubuf, ebuf,
               cs_in, cs_prev, cs_next, capacity,
               fl_in, fl_prev, fl_next, filter_size, two_lru,
               pit_pending, pit_flag, cq_k, cq_t, delay,
               c_req, c_cs, c_pit, c_fwd, batch, n_batches,
               warmup_requests, warmup_time, total_requests):
    K = ht.shape[0]
    nbuf = ubuf.shape[0]
    clock = sc[CLOCK]
    pos = np.int64(sc[POS])
    seen = np.int64(sc[SEEN])
    counted = np.int64(sc[COUNTED])
    cs_head, cs_tail, cs_size = np.int64(sc[CS_HEAD]), np.int64(sc[CS_TAIL]), np.int64(sc[CS_SIZE])
    fl_head, fl_tail, fl_size = np.int64(sc[FL_HEAD]), np.int64(sc[FL_TAIL]), np.int64(sc[FL_SIZE])
    cq_head, cq_len = np.int64(sc[CQ_HEAD]), np.int64(sc[CQ_LEN])
    fwd_all, done_all = np.int64(sc[FWD_ALL]), np.int64(sc[DONE_ALL])
    counting = sc[COUNTING] > 0
    status = STATUS_DONE

    while counted < total_requests:
        if cq_len > 0 and cq_t[cq_head] < ht[0]:
            # download completion
            k = cq_k[cq_head]
            clock = cq_t[cq_head]
            cq_head += 1
            if cq_head == K:
                cq_head = 0
            cq_len -= 1
            done_all += 1
            insert = (not two_lru) or pit_flag[k]
            pit_pending[k] = False
            pit_flag[k] = False
            if insert:
                if cs_size == capacity:
                    v = cs_tail
                    cs_head, cs_tail = _unlink(cs_prev, cs_next, v, cs_head, cs_tail)
                    cs_in[v] = False
                    cs_size -= 1
                cs_head, cs_tail = _push_front(cs_prev, cs_next, k, cs_head, cs_tail)
                cs_in[k] = True
                cs_size += 1
                if cs_size > capacity:
                    raise AssertionError("content store over capacity")
            continue

        if pos >= nbuf:
            status = STATUS_REFILL
            break

        # request arrival
        k = hk[0]
        clock = ht[0]
        seen += 1
        if not counting and seen > warmup_requests and clock >= warmup_time:
            counting = True

        was_in_filter = False
        if two_lru:
            was_in_filter = fl_in[k]
            if was_in_filter:
                fl_head, fl_tail = _unlink(fl_prev, fl_next, k, fl_head, fl_tail)
            else:
                if fl_size == filter_size:
                    v = fl_tail
                    fl_head, fl_tail = _unlink(fl_prev, fl_next, v, fl_head, fl_tail)
                    fl_in[v] = False
                    fl_size -= 1
                fl_in[k] = True
                fl_size += 1
            fl_head, fl_tail = _push_front(fl_prev, fl_next, k, fl_head, fl_tail)

        outcome = 0
        if cs_in[k]:
            if pit_pending[k]:
                raise AssertionError("content both cached and pending")
            cs_head, cs_tail = _unlink(cs_prev, cs_next, k, cs_head, cs_tail)
            cs_head, cs_tail = _push_front(cs_prev, cs_next, k, cs_head, cs_tail)
        elif pit_pending[k]:
            outcome = 1
            if was_in_filter:
                pit_flag[k] = True
        else:
            outcome = 2
            pit_pending[k] = True
            pit_flag[k] = was_in_filter
            j = cq_head + cq_len
            if j >= K:
                j -= K
            cq_k[j] = k
            cq_t[j] = clock + delay
            cq_len += 1
            fwd_all += 1

        if counting:
            b = counted * n_batches // total_requests
            c_req[k] += 1
            if outcome == 0:
                c_cs[k] += 1
            elif outcome == 1:
                c_pit[k] += 1
            else:
                c_fwd[k] += 1
            batch[b, outcome] += 1
            counted += 1

        # schedule the next request for k
        if ubuf[pos] < w1[k]:
            x = ebuf[pos] / mu1[k]
        else:
            x = ebuf[pos] / mu2[k]
        pos += 1
        ht[0] = clock + x
        _sift_down(ht, hk, K, 0)

    sc[CLOCK] = clock
    sc[POS] = pos
    sc[SEEN] = seen
    sc[COUNTED] = counted
    sc[CS_HEAD], sc[CS_TAIL], sc[CS_SIZE] = cs_head, cs_tail, cs_size
    sc[FL_HEAD], sc[FL_TAIL], sc[FL_SIZE] = fl_head, fl_tail, fl_size
    sc[CQ_HEAD], sc[CQ_LEN] = cq_head, cq_len
    sc[FWD_ALL], sc[DONE_ALL] = fwd_all, done_all
    sc[COUNTING] = 1.0 if counting else 0.0
    return status
