# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled refinement kernels; see ``_pykernel`` for the reference semantics."""

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

cdef enum:
    MAXN = 32

cdef int64_t LIMIT = (<int64_t>1) << 62


cdef class Context:
    cdef readonly int n
    cdef Py_ssize_t size
    cdef int64_t *w
    cdef int64_t *gw
    cdef bint narrow
    cdef list wobj
    cdef list gwobj

    def __cinit__(self, int n, weights, gvals):
        cdef Py_ssize_t k
        self.n = n
        self.size = len(weights)
        self.w = NULL
        self.gw = NULL
        self.wobj = [int(x) for x in weights]
        self.gwobj = [x if g > 0 else -x for x, g in zip(self.wobj, gvals)]
        # slice sums are bounded by the total weight
        self.narrow = sum(self.wobj) < LIMIT
        if self.narrow:
            self.w = <int64_t *> malloc(self.size * sizeof(int64_t))
            self.gw = <int64_t *> malloc(self.size * sizeof(int64_t))
            if self.w == NULL or self.gw == NULL:
                raise MemoryError()
            for k in range(self.size):
                self.w[k] = self.wobj[k]
                self.gw[k] = self.gwobj[k]

    def __dealloc__(self):
        free(self.w)
        free(self.gw)

    def slice_sums(self, members):
        if not self.narrow:
            return self._slice_sums_obj(members)
        cdef int64_t up[MAXN]
        cdef int64_t gup[MAXN]
        cdef int64_t total = 0, gtotal = 0, ws, gs
        cdef Py_ssize_t s, x, low
        cdef int i, n = self.n
        for i in range(n):
            up[i] = 0
            gup[i] = 0
        for obj in members:
            s = obj
            ws = self.w[s]
            gs = self.gw[s]
            total += ws
            gtotal += gs
            x = s
            i = 0
            while x:
                if x & 1:
                    up[i] += ws
                    gup[i] += gs
                x >>= 1
                i += 1
        mass = [0] * (2 * n)
        gmass = [0] * (2 * n)
        for i in range(n):
            mass[2 * i] = total - up[i]
            mass[2 * i + 1] = up[i]
            gmass[2 * i] = gtotal - gup[i]
            gmass[2 * i + 1] = gup[i]
        return mass, gmass

    def _slice_sums_obj(self, members):
        cdef int i, n = self.n
        cdef Py_ssize_t s
        up = [0] * n
        gup = [0] * n
        total = 0
        gtotal = 0
        for obj in members:
            s = obj
            ws = self.wobj[s]
            gs = self.gwobj[s]
            total += ws
            gtotal += gs
            for i in range(n):
                if (s >> i) & 1:
                    up[i] += ws
                    gup[i] += gs
        mass = [0] * (2 * n)
        gmass = [0] * (2 * n)
        for i in range(n):
            mass[2 * i] = total - up[i]
            mass[2 * i + 1] = up[i]
            gmass[2 * i] = gtotal - gup[i]
            gmass[2 * i + 1] = gup[i]
        return mass, gmass

    def price_groups(self, members, coeffs):
        cdef int i, n = self.n
        cdef int64_t c[2 * MAXN]
        cdef int64_t key
        cdef Py_ssize_t s
        cdef dict groups = {}
        cdef list g
        bound = 0
        for i in range(n):
            bound += max(abs(coeffs[2 * i]), abs(coeffs[2 * i + 1]))
        if bound >= LIMIT:
            return self._price_groups_obj(members, coeffs)
        for i in range(2 * n):
            c[i] = coeffs[i]
        for obj in members:
            s = obj
            key = 0
            for i in range(n):
                key += c[2 * i + ((s >> i) & 1)]
            k = key
            g = groups.get(k)
            if g is None:
                groups[k] = [obj]
            else:
                g.append(obj)
        return list(groups.items())

    def _price_groups_obj(self, members, coeffs):
        cdef int i, n = self.n
        cdef Py_ssize_t s
        cdef dict groups = {}
        cdef list g
        for obj in members:
            s = obj
            key = 0
            for i in range(n):
                key += coeffs[2 * i + ((s >> i) & 1)]
            g = groups.get(key)
            if g is None:
                groups[key] = [obj]
            else:
                g.append(obj)
        return list(groups.items())
