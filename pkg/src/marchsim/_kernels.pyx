# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edge-loop kernel: controller FSM + datapath + fault memory.

Semantically identical to the pure-Python loop in bist_sim._run_python;
the differential tests in tests/test_kernels.py hold the two paths to
byte-for-byte equality.  Selected automatically at import when built.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

# controller states (fixed encoding)
cdef enum:
    S_IDLE = 0
    WDN0 = 1
    RUP0 = 2
    WUP1 = 3
    RDN1 = 4
    WDNA0 = 5
    PAUSE = 6
    RDN0 = 7
    WDN1 = 8
    RUP1 = 9
    WUP0 = 10
    RDNA0 = 11
    S_DONE = 12

# packed fault kinds
cdef enum:
    F_STUCK = 0
    F_TRANS = 1
    F_NOACC = 2
    F_MAPSTO = 3
    F_ALSO = 4
    F_CFIN = 5
    F_CFID = 6
    F_CFST = 7
    F_DRF = 8

EDGE_CODES = {"rising": 0, "falling": 1, "any": 2}
DECAY_CODES = {"tozero": 0, "toone": 1, "complement": 2}


def pack_fault(fault):
    """Normalize a FaultSpec into the flat integer record the loop scans."""
    from .fault_memory import (
        AlsoAccesses,
        Coupling,
        Idempotent,
        Inversion,
        MapsTo,
        NoAccess,
        Retention,
        StateCoupling,
        StuckAt,
        Transition,
    )

    if isinstance(fault, StuckAt):
        return (F_STUCK, fault.cell.word, fault.cell.bit, fault.value, 0, 0)
    if isinstance(fault, Transition):
        return (F_TRANS, fault.cell.word, fault.cell.bit, EDGE_CODES[fault.blocked.value], 0, 0)
    if isinstance(fault, NoAccess):
        return (F_NOACC, fault.addr, 0, 0, 0, 0)
    if isinstance(fault, MapsTo):
        return (F_MAPSTO, fault.addr, fault.other, 0, 0, 0)
    if isinstance(fault, AlsoAccesses):
        return (F_ALSO, fault.addr, fault.other, 0, 0, 0)
    if isinstance(fault, Coupling):
        a, v = fault.aggressor, fault.victim
        if isinstance(fault.kind, Inversion):
            return (F_CFIN, a.word, a.bit, v.word, v.bit, EDGE_CODES[fault.kind.trigger.value])
        if isinstance(fault.kind, Idempotent):
            return (
                F_CFID, a.word, a.bit, v.word, v.bit,
                EDGE_CODES[fault.kind.trigger.value] * 2 + fault.kind.forced,
            )
        if isinstance(fault.kind, StateCoupling):
            return (
                F_CFST, a.word, a.bit, v.word, v.bit,
                fault.kind.aggressor_value * 2 + fault.kind.forced,
            )
    if isinstance(fault, Retention):
        return (F_DRF, fault.cell.word, fault.cell.bit, fault.limit_cycles, DECAY_CODES[fault.decay.value], 0)
    raise TypeError(f"not a fault spec: {fault!r}")


cdef long long _read_word(
    long long addr,
    long long cycle,
    long long width,
    long long[::1] data,
    long long[:, ::1] last_write,
    long long[:, ::1] flt,
    Py_ssize_t nflt,
) noexcept:
    cdef long long value = data[addr]
    cdef long long out = 0
    cdef long long vb
    cdef Py_ssize_t i
    cdef long long bit
    for bit in range(width):
        vb = (value >> bit) & 1
        for i in range(nflt):
            if flt[i, 0] == F_DRF and flt[i, 1] == addr and flt[i, 2] == bit:
                if cycle - last_write[addr, bit] > flt[i, 3]:
                    if flt[i, 4] == 0:
                        vb = 0
                    elif flt[i, 4] == 1:
                        vb = 1
                    else:
                        vb = vb ^ 1
        for i in range(nflt):
            if flt[i, 0] == F_CFST and flt[i, 3] == addr and flt[i, 4] == bit:
                if (data[flt[i, 1]] >> flt[i, 2]) & 1 == flt[i, 5] // 2:
                    vb = flt[i, 5] % 2
        for i in range(nflt):
            if flt[i, 0] == F_STUCK and flt[i, 1] == addr and flt[i, 2] == bit:
                vb = flt[i, 3]
        out |= vb << bit
    return out


cdef long long _mem_read(
    long long addr,
    long long cycle,
    long long width,
    long long mask,
    long long[::1] data,
    long long[::1] shadow,
    long long[:, ::1] last_write,
    long long[:, ::1] flt,
    Py_ssize_t nflt,
) noexcept:
    cdef Py_ssize_t i
    cdef long long other, a, b, agree
    # first matching decoder fault wins, in injection order
    for i in range(nflt):
        if flt[i, 1] != addr:
            continue
        if flt[i, 0] == F_NOACC:
            return (~shadow[addr]) & mask
        if flt[i, 0] == F_MAPSTO:
            return _read_word(flt[i, 2], cycle, width, data, last_write, flt, nflt)
        if flt[i, 0] == F_ALSO:
            other = flt[i, 2]
            a = _read_word(addr, cycle, width, data, last_write, flt, nflt)
            b = _read_word(other, cycle, width, data, last_write, flt, nflt)
            agree = ~(a ^ b) & mask
            return (a & agree) | (~a & ~agree & mask)
    return _read_word(addr, cycle, width, data, last_write, flt, nflt)


cdef void _store(
    long long addr,
    long long value,
    long long cycle,
    long long width,
    long long[::1] data,
    long long[:, ::1] last_write,
    long long[:, ::1] flt,
    Py_ssize_t nflt,
    long long* old_out,
    long long* new_out,
) noexcept:
    cdef long long old = data[addr]
    cdef long long new = 0
    cdef long long ob, nb
    cdef Py_ssize_t i
    cdef long long bit
    for bit in range(width):
        ob = (old >> bit) & 1
        nb = (value >> bit) & 1
        for i in range(nflt):
            if flt[i, 0] == F_TRANS and flt[i, 1] == addr and flt[i, 2] == bit:
                if flt[i, 3] == 0 and ob == 0 and nb == 1:
                    nb = ob
                elif flt[i, 3] == 1 and ob == 1 and nb == 0:
                    nb = ob
        for i in range(nflt):
            if flt[i, 0] == F_STUCK and flt[i, 1] == addr and flt[i, 2] == bit:
                nb = flt[i, 3]
        new |= nb << bit
    data[addr] = new
    for bit in range(width):
        last_write[addr, bit] = cycle
    old_out[0] = old
    new_out[0] = new


cdef void _mem_write(
    long long addr,
    long long value,
    long long cycle,
    long long width,
    long long mask,
    long long[::1] data,
    long long[::1] shadow,
    long long[:, ::1] last_write,
    long long[:, ::1] flt,
    Py_ssize_t nflt,
) noexcept:
    cdef long long targets[2]
    cdef long long olds[2]
    cdef long long news[2]
    cdef Py_ssize_t ntarget = 1
    cdef Py_ssize_t i, t
    cdef long long vw, vb, cur, forced, ob, nb, edge, trigger, tw
    value = value & mask
    shadow[addr] = value
    targets[0] = addr
    for i in range(nflt):
        if flt[i, 1] != addr:
            continue
        if flt[i, 0] == F_NOACC:
            ntarget = 0
            break
        if flt[i, 0] == F_MAPSTO:
            targets[0] = flt[i, 2]
            break
        if flt[i, 0] == F_ALSO:
            targets[1] = flt[i, 2]
            ntarget = 2
            break
    if ntarget == 0:
        return
    for t in range(ntarget):
        _store(targets[t], value, cycle, width, data, last_write, flt, nflt,
               &olds[t], &news[t])
    # write-triggered couplings fire off the direct write's bit edges
    for i in range(nflt):
        if flt[i, 0] != F_CFIN and flt[i, 0] != F_CFID:
            continue
        for t in range(ntarget):
            if flt[i, 1] != targets[t]:
                continue
            ob = (olds[t] >> flt[i, 2]) & 1
            nb = (news[t] >> flt[i, 2]) & 1
            if ob == 0 and nb == 1:
                edge = 0
            elif ob == 1 and nb == 0:
                edge = 1
            else:
                continue
            if flt[i, 0] == F_CFIN:
                trigger = flt[i, 5]
            else:
                trigger = flt[i, 5] // 2
            if trigger != 2 and trigger != edge:
                continue
            vw = flt[i, 3]
            vb = flt[i, 4]
            if flt[i, 0] == F_CFIN:
                cur = (data[vw] >> vb) & 1
                forced = cur ^ 1
            else:
                forced = flt[i, 5] % 2
            for tw in range(nflt):
                if flt[tw, 0] == F_STUCK and flt[tw, 1] == vw and flt[tw, 2] == vb:
                    forced = flt[tw, 3]
            data[vw] = (data[vw] & ~((<long long>1) << vb)) | (forced << vb)
            last_write[vw, vb] = cycle


def run_edges(
    int c_size,
    int word_width,
    cnp.ndarray[cnp.int64_t, ndim=1] t_mode_arr,
    cnp.ndarray[cnp.int64_t, ndim=1] rst_arr,
    long long n_edges,
    list packed_faults,
    long long post_done_edges,
    int fast_forward_pause,
    int init_fill,
    long long last_event,
):
    cdef long long words = (<long long>1) << c_size
    cdef long long c_max = words - 1
    cdef long long mask = ((<long long>1) << word_width) - 1
    cdef long long pat_one = mask

    flt_np = np.array(packed_faults, dtype=np.int64).reshape(-1, 6)
    cdef long long[:, ::1] flt = flt_np
    cdef Py_ssize_t nflt = flt_np.shape[0]

    data_np = np.zeros(words, dtype=np.int64)
    shadow_np = np.zeros(words, dtype=np.int64)
    lw_np = np.zeros((words, word_width), dtype=np.int64)
    cdef long long[::1] data = data_np
    cdef long long[::1] shadow = shadow_np
    cdef long long[:, ::1] last_write = lw_np
    if init_fill:
        data_np[:] = mask
        shadow_np[:] = mask

    cols_np = {
        name: np.zeros(n_edges, dtype=np.int64)
        for name in (
            "t_mode", "rst", "match", "en", "rw", "g_patt", "done", "pass",
            "fail", "state", "count", "addr", "data_written", "mem_out",
            "signature", "c_min", "c_max",
        )
    }
    cdef long long[::1] o_tmode = cols_np["t_mode"]
    cdef long long[::1] o_rst = cols_np["rst"]
    cdef long long[::1] o_match = cols_np["match"]
    cdef long long[::1] o_en = cols_np["en"]
    cdef long long[::1] o_rw = cols_np["rw"]
    cdef long long[::1] o_gpatt = cols_np["g_patt"]
    cdef long long[::1] o_done = cols_np["done"]
    cdef long long[::1] o_pass = cols_np["pass"]
    cdef long long[::1] o_fail = cols_np["fail"]
    cdef long long[::1] o_state = cols_np["state"]
    cdef long long[::1] o_count = cols_np["count"]
    cdef long long[::1] o_addr = cols_np["addr"]
    cdef long long[::1] o_dw = cols_np["data_written"]
    cdef long long[::1] o_mo = cols_np["mem_out"]
    cdef long long[::1] o_sig = cols_np["signature"]
    cdef long long[::1] o_cmin = cols_np["c_min"]
    cdef long long[::1] o_cmax = cols_np["c_max"]

    cdef long long[::1] t_mode = t_mode_arr
    cdef long long[::1] rst = rst_arr

    # registered controller state
    cdef long long state = S_IDLE
    cdef long long en = 0, rw = 1, g_patt = 1, done = 0
    cdef long long pass_ = 1, fail = 0, count = 0

    cdef long long match_prev = 1
    cdef long long mem_out_prev = 0
    cdef long long data_written_prev = 0
    cdef long long settled_run = 0
    cdef long long used = 0
    cdef long long e, m, addr, signature, data_written, mem_out, match_new
    cdef long long old_count
    cdef bint settled

    for e in range(n_edges):
        m = match_prev
        # one positive edge of the FSM; reset dominates
        if rst[e]:
            state = S_IDLE
            en = 0
            done = 0
            fail = 0
            pass_ = 1
            count = 0
            g_patt = 1
            rw = 1
        else:
            old_count = count
            if state == S_IDLE:
                if t_mode[e]:
                    state = WDN0
                    en = 1
                    count = c_max
                    rw = 0
                    g_patt = 0
            elif state == WDN0:
                if old_count == 0:
                    state = RUP0
                    rw = 1
                    count = 0
                else:
                    count = (old_count - 1) & c_max
            elif state == RUP0:
                if m:
                    pass_ = 1
                    fail = 0
                else:
                    pass_ = 0
                    fail = 1
                if old_count == c_max:
                    state = WUP1
                    g_patt = 1
                    rw = 0
                    count = 0
                else:
                    count = (old_count + 1) & c_max
            elif state == WUP1:
                if old_count == c_max:
                    state = RDN1
                    rw = 1
                    count = c_max
                else:
                    count = (old_count + 1) & c_max
            elif state == RDN1:
                if m:
                    pass_ = 1
                    fail = 0
                else:
                    pass_ = 0
                    fail = 1
                if old_count == 0:
                    state = WDNA0
                    g_patt = 0
                    rw = 0
                    count = c_max
                else:
                    count = (old_count - 1) & c_max
            elif state == WDNA0:
                if old_count == 0:
                    state = PAUSE
                    count = c_max if fast_forward_pause else 0
                else:
                    count = (old_count - 1) & c_max
            elif state == PAUSE:
                if old_count == c_max:
                    state = RDN0
                    rw = 1
                    count = c_max
                else:
                    count = (old_count + 1) & c_max
            elif state == RDN0:
                if m:
                    pass_ = 1
                    fail = 0
                else:
                    pass_ = 0
                    fail = 1
                if old_count == 0:
                    state = WDN1
                    rw = 0
                    g_patt = 1
                    count = c_max
                else:
                    count = (old_count - 1) & c_max
            elif state == WDN1:
                if old_count == 0:
                    state = RUP1
                    rw = 1
                    count = 0
                else:
                    count = (old_count - 1) & c_max
            elif state == RUP1:
                if m:
                    pass_ = 1
                    fail = 0
                else:
                    pass_ = 0
                    fail = 1
                if old_count == c_max:
                    state = WUP0
                    g_patt = 0
                    rw = 0
                    count = 0
                else:
                    count = (old_count + 1) & c_max
            elif state == WUP0:
                if old_count == c_max:
                    state = RDNA0
                    rw = 1
                    count = c_max
                else:
                    count = (old_count + 1) & c_max
            elif state == RDNA0:
                if m:
                    pass_ = 1
                    fail = 0
                else:
                    pass_ = 0
                    fail = 1
                if old_count == 0:
                    state = S_DONE
                    done = 1
                    en = 0
                    count = (old_count - 1) & c_max
                else:
                    count = (old_count - 1) & c_max
            else:  # S_DONE
                if not t_mode[e]:
                    state = S_IDLE

        addr = count
        signature = pat_one if g_patt else 0
        data_written = data_written_prev
        mem_out = mem_out_prev
        match_new = 1
        if en and (state == WDN0 or state == WUP1 or state == WDNA0
                   or state == WDN1 or state == WUP0):
            data_written = pat_one if g_patt else 0
            _mem_write(addr, data_written, e, word_width, mask, data, shadow,
                       last_write, flt, nflt)
        elif en and (state == RUP0 or state == RDN1 or state == RDN0
                     or state == RUP1 or state == RDNA0):
            mem_out = _mem_read(addr, e, word_width, mask, data, shadow,
                                last_write, flt, nflt)
            match_new = 1 if mem_out == signature else 0

        o_tmode[e] = t_mode[e]
        o_rst[e] = rst[e]
        o_match[e] = match_new
        o_en[e] = en
        o_rw[e] = rw
        o_gpatt[e] = g_patt
        o_done[e] = done
        o_pass[e] = pass_
        o_fail[e] = fail
        o_state[e] = state
        o_count[e] = count
        o_addr[e] = addr
        o_dw[e] = data_written
        o_mo[e] = mem_out
        o_sig[e] = signature
        o_cmin[e] = 0
        o_cmax[e] = c_max

        match_prev = match_new
        mem_out_prev = mem_out
        data_written_prev = data_written
        used = e + 1
        settled = state == S_DONE or (
            state == S_IDLE and t_mode[e] == 0 and rst[e] == 0
        )
        if settled and e >= last_event:
            settled_run += 1
        else:
            settled_run = 0
        if settled_run > post_done_edges:
            break

    return {name: col[:used] for name, col in cols_np.items()}
