# cython: language_level=3, boundscheck=False, wraparound=False
# distutils: language = c++
"""Compiled bounded-containment engine.

Same contract as ``_kernel_py.Engine``; relations are packed into one
64-bit word, which limits this engine to spaces of at most 8 states
(the selector enforces that).
"""

from cython.operator cimport dereference
from libc.stdint cimport int64_t, uint64_t
from libcpp.algorithm cimport sort as csort
from libcpp.map cimport map as cppmap
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

BACKEND = "cython"


cdef class Engine:
    cdef int n
    cdef uint64_t nmask
    cdef vector[uint64_t] pn, pt, bp, be
    cdef vector[int] bidx, bc
    cdef cppmap[vector[int], int] subs
    cdef vector[vector[int]] sub_members
    cdef vector[uint64_t] sub_pn, sub_pt
    cdef unordered_map[uint64_t, int] succ_idx
    cdef vector[vector[int64_t]] succ_store
    cdef unordered_map[uint64_t, int] memo
    cdef int empty_sid

    def __init__(self, int n):
        if n > 8:
            raise ValueError("compiled engine supports at most 8 states")
        self.n = n
        self.nmask = (<uint64_t>1 << n) - 1
        self.bidx.push_back(0)
        self._reset()

    cdef void _reset(self):
        cdef vector[int] empty
        self.subs.clear()
        self.sub_members.clear()
        self.sub_pn.clear()
        self.sub_pt.clear()
        self.succ_idx.clear()
        self.succ_store.clear()
        self.memo.clear()
        self.empty_sid = self._intern(empty)

    @property
    def row_count(self):
        return self.pn.size()

    def clear_memo(self):
        self._reset()

    def add_row(self, pn_mask, pt_mask, branches):
        cdef int rid = <int>self.pn.size()
        self.pn.push_back(<uint64_t>pn_mask)
        self.pt.push_back(<uint64_t>pt_mask)
        for p, e, cont in branches:
            self.bp.push_back(<uint64_t>p)
            self.be.push_back(<uint64_t>e)
            self.bc.push_back(<int>cont)
        self.bidx.push_back(<int>self.bp.size())
        return rid

    cdef int _intern(self, vector[int]& members):
        it = self.subs.find(members)
        if it != self.subs.end():
            return dereference(it).second
        cdef int sid = <int>self.sub_members.size()
        self.subs[members] = sid
        self.sub_members.push_back(members)
        cdef uint64_t pn_and = self.nmask
        cdef uint64_t pt_or = 0
        cdef size_t i
        for i in range(members.size()):
            pn_and &= self.pn[members[i]]
            pt_or |= self.pt[members[i]]
        self.sub_pn.push_back(pn_and)
        self.sub_pt.push_back(pt_or)
        return sid

    cdef int _successors(self, int sid, int sigma):
        """Index into ``succ_store`` of the flattened, step-sorted
        (step, subset) successor list of subset ``sid`` at ``sigma``."""
        cdef uint64_t key = (<uint64_t>sid << 4) | <uint64_t>sigma
        it = self.succ_idx.find(key)
        if it != self.succ_idx.end():
            return dereference(it).second
        # (step << 32 | cont) pairs, then sort to group per step.
        cdef vector[int64_t] pairs
        cdef int shift = sigma * self.n
        cdef uint64_t pm, em
        cdef int m, b, to
        cdef size_t i
        for i in range(self.sub_members[sid].size()):
            m = self.sub_members[sid][i]
            for b in range(self.bidx[m], self.bidx[m + 1]):
                pm = (self.bp[b] >> shift) & self.nmask
                em = (self.be[b] >> shift) & self.nmask
                to = 0
                while pm or em:
                    if pm & 1:
                        pairs.push_back((<int64_t>to << 33) | self.bc[b])
                    if em & 1:
                        pairs.push_back((<int64_t>to << 33) | (<int64_t>1 << 32)
                                        | self.bc[b])
                    pm >>= 1
                    em >>= 1
                    to += 1
        csort(pairs.begin(), pairs.end())
        cdef vector[int64_t] flat
        cdef vector[int] members
        cdef int64_t step, prev_step = -1
        cdef int cont, prev_cont
        for i in range(pairs.size()):
            step = pairs[i] >> 32
            cont = <int>(pairs[i] & 0xFFFFFFFF)
            if step != prev_step:
                if prev_step >= 0:
                    flat.push_back(prev_step)
                    flat.push_back(self._intern(members))
                members.clear()
                prev_step = step
                prev_cont = -1
            if cont != prev_cont:
                members.push_back(cont)
                prev_cont = cont
        if prev_step >= 0:
            flat.push_back(prev_step)
            flat.push_back(self._intern(members))
        cdef int idx = <int>self.succ_store.size()
        self.succ_store.push_back(flat)
        self.succ_idx[key] = idx
        return idx

    cdef bint _check(self, int s1, int s2, int sigma, int fuel):
        cdef uint64_t key = ((<uint64_t>s1 << 38) | (<uint64_t>s2 << 12)
                             | (<uint64_t>sigma << 8) | <uint64_t>fuel)
        it = self.memo.find(key)
        if it != self.memo.end():
            return dereference(it).second == 1
        cdef uint64_t bit = <uint64_t>1 << sigma
        cdef bint result
        cdef int si1, si2, steps2, k, j, t1
        cdef int64_t step
        if not (self.sub_pn[s1] & bit):
            result = True
        elif not (self.sub_pn[s2] & bit):
            result = False
        elif (self.sub_pt[s2] & bit) and not (self.sub_pt[s1] & bit):
            result = False
        else:
            si2 = self._successors(s2, sigma)
            steps2 = <int>self.succ_store[si2].size()
            if steps2 == 0:
                result = True
            elif fuel == 0:
                si1 = self._successors(s1, sigma)
                result = self.succ_store[si1].size() > 0
            else:
                si1 = self._successors(s1, sigma)
                result = True
                for k in range(0, steps2, 2):
                    step = self.succ_store[si2][k]
                    t1 = self.empty_sid
                    for j in range(0, <int>self.succ_store[si1].size(), 2):
                        if self.succ_store[si1][j] == step:
                            t1 = <int>self.succ_store[si1][j + 1]
                            break
                    if not self._check(t1, <int>self.succ_store[si2][k + 1],
                                       <int>(step >> 1), fuel - 1):
                        result = False
                        break
        # gcc -O1+ drops the write when a conditional expression is
        # assigned straight through operator[]; keep the temporary.
        cdef int stored = 1 if result else 0
        self.memo[key] = stored
        return result

    def debug_successors(self, members, int sigma):
        """Testing hook: successor map of an explicit subset."""
        cdef vector[int] ms
        for m in sorted(members):
            ms.push_back(m)
        cdef int sid = self._intern(ms)
        cdef int si = self._successors(sid, sigma)
        out = {}
        cdef size_t k
        for k in range(0, self.succ_store[si].size(), 2):
            step = self.succ_store[si][k]
            tid = self.succ_store[si][k + 1]
            out[int(step)] = tuple(self.sub_members[tid])
        return out

    def debug_check(self, members1, members2, int sigma, int fuel):
        """Testing hook: containment verdict for explicit subsets."""
        cdef vector[int] m1, m2
        for m in sorted(members1):
            m1.push_back(m)
        for m in sorted(members2):
            m2.push_back(m)
        return bool(self._check(self._intern(m1), self._intern(m2), sigma, fuel))

    def refines(self, int root1, int root2, int fuel):
        cdef vector[int] v1, v2
        v1.push_back(root1)
        v2.push_back(root2)
        cdef int s1 = self._intern(v1)
        cdef int s2 = self._intern(v2)
        cdef int sigma
        for sigma in range(self.n):
            if not self._check(s1, s2, sigma, fuel):
                return sigma
        return -1
