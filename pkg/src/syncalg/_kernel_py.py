"""Pure-Python bounded-containment engine.

Works on lowered step tables: row ``i`` holds a command's non-abort
mask, termination mask and branch slice.  The check walks determinized
subset pairs with memoization; abort on the covering side closes the
subtree, abort on the covered side that the coverer cannot match fails
it.  The compiled twin in ``_kernel_c`` implements the same contract.
"""

from __future__ import annotations

BACKEND = "pure"


class Engine:
    def __init__(self, n):
        self.n = n
        self.nmask = (1 << n) - 1
        self.pn = []
        self.pt = []
        self.bidx = [0]
        self.bp = []
        self.be = []
        self.bc = []
        self._reset_caches()

    def _reset_caches(self):
        self._subs = {}
        self._sub_pn = []
        self._sub_pt = []
        self._sub_members = []
        self._succ = {}
        self._memo = {}
        self._empty = self._intern(())

    @property
    def row_count(self):
        return len(self.pn)

    def add_row(self, pn_mask, pt_mask, branches):
        rid = len(self.pn)
        self.pn.append(pn_mask)
        self.pt.append(pt_mask)
        for p, e, cont in branches:
            self.bp.append(p)
            self.be.append(e)
            self.bc.append(cont)
        self.bidx.append(len(self.bp))
        return rid

    def clear_memo(self):
        self._reset_caches()

    def _intern(self, members):
        sid = self._subs.get(members)
        if sid is None:
            sid = len(self._sub_members)
            self._subs[members] = sid
            self._sub_members.append(members)
            pn_and = self.nmask
            pt_or = 0
            for m in members:
                pn_and &= self.pn[m]
                pt_or |= self.pt[m]
            self._sub_pn.append(pn_and)
            self._sub_pt.append(pt_or)
        return sid

    def _successors(self, sid, sigma):
        key = (sid, sigma)
        hit = self._succ.get(key)
        if hit is not None:
            return hit
        n = self.n
        nmask = self.nmask
        shift = sigma * n
        raw = {}
        for m in self._sub_members[sid]:
            for b in range(self.bidx[m], self.bidx[m + 1]):
                cont = self.bc[b]
                pm = self.bp[b] >> shift & nmask
                to = 0
                while pm:
                    if pm & 1:
                        raw.setdefault(to << 1, set()).add(cont)
                    pm >>= 1
                    to += 1
                em = self.be[b] >> shift & nmask
                to = 0
                while em:
                    if em & 1:
                        raw.setdefault(to << 1 | 1, set()).add(cont)
                    em >>= 1
                    to += 1
        out = {step: self._intern(tuple(sorted(members))) for step, members in raw.items()}
        self._succ[key] = out
        return out

    def _check(self, s1, s2, sigma, fuel):
        key = (s1, s2, sigma, fuel)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        bit = 1 << sigma
        if not self._sub_pn[s1] & bit:
            result = True  # covering side aborts: everything below is allowed
        elif not self._sub_pn[s2] & bit:
            result = False
        elif self._sub_pt[s2] & bit and not self._sub_pt[s1] & bit:
            result = False
        else:
            succ2 = self._successors(s2, sigma)
            if not succ2:
                result = True
            elif fuel == 0:
                result = bool(self._successors(s1, sigma))
            else:
                succ1 = self._successors(s1, sigma)
                empty = self._empty
                result = True
                for step, t2 in succ2.items():
                    t1 = succ1.get(step, empty)
                    if not self._check(t1, t2, step >> 1, fuel - 1):
                        result = False
                        break
        self._memo[key] = result
        return result

    def refines(self, root1, root2, fuel):
        """-1 when every behavior of row ``root2`` is covered by row
        ``root1`` from every start state; else the first failing state."""
        s1 = self._intern((root1,))
        s2 = self._intern((root2,))
        for sigma in range(self.n):
            if not self._check(s1, s2, sigma, fuel):
                return sigma
        return -1
