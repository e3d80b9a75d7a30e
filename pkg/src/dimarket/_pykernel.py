"""Pure-Python refinement kernels.

Same interface as the compiled ``_ckernel`` module; used when the extension is
not built or when ``DIMARKET_PURE_PYTHON`` is set.
"""

_TABLE_MIN_BLOCK = 64


class Context:
    """Integer prior weights and payoffs for one (security, prior) pair."""

    def __init__(self, n, weights, gvals):
        self.n = n
        self.weights = list(weights)
        self.gweights = [w if g > 0 else -w for w, g in zip(weights, gvals)]

    def slice_sums(self, members):
        """Per-player slice sums over a block.

        Returns ``(mass, gmass)``, each of length ``2n``; index ``2*i + bit`` holds
        the sum over states of the block whose bit ``i`` equals ``bit``.
        """
        n = self.n
        w, gw = self.weights, self.gweights
        up = [0] * n
        gup = [0] * n
        total = gtotal = 0
        for s in members:
            ws = w[s]
            gs = gw[s]
            total += ws
            gtotal += gs
            while s:
                low = s & -s
                i = low.bit_length() - 1
                up[i] += ws
                gup[i] += gs
                s ^= low
        mass = [0] * (2 * n)
        gmass = [0] * (2 * n)
        for i in range(n):
            mass[2 * i] = total - up[i]
            mass[2 * i + 1] = up[i]
            gmass[2 * i] = gtotal - gup[i]
            gmass[2 * i + 1] = gup[i]
        return mass, gmass

    def price_groups(self, members, coeffs):
        """Group block members by ``sum_i coeffs[2*i + bit_i(s)]``.

        Returns ``[(key, [members...]), ...]`` ordered by first appearance.
        """
        n = self.n
        base = sum(coeffs[0::2])
        delta = [coeffs[2 * i + 1] - coeffs[2 * i] for i in range(n)]
        groups = {}
        if len(members) >= _TABLE_MIN_BLOCK:
            tables = []
            for lo in range(0, n, 8):
                d = delta[lo:lo + 8]
                t = [0] * (1 << len(d))
                for b in range(1, len(t)):
                    low = b & -b
                    t[b] = t[b ^ low] + d[low.bit_length() - 1]
                tables.append(t)
            if len(tables) == 1:
                t0 = tables[0]
                for s in members:
                    key = base + t0[s]
                    g = groups.get(key)
                    if g is None:
                        groups[key] = [s]
                    else:
                        g.append(s)
            else:
                for s in members:
                    key = base
                    x = s
                    for t in tables:
                        key += t[x & 255]
                        x >>= 8
                    g = groups.get(key)
                    if g is None:
                        groups[key] = [s]
                    else:
                        g.append(s)
        else:
            for s in members:
                key = base
                x = s
                while x:
                    low = x & -x
                    key += delta[low.bit_length() - 1]
                    x ^= low
                g = groups.get(key)
                if g is None:
                    groups[key] = [s]
                else:
                    g.append(s)
        return list(groups.items())
