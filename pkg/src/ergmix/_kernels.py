"""Jitted inner loops for network simulation.

One kernel runs either the tie/no-tie Metropolis sampler or the exact
single-dyad Gibbs sampler over a dense adjacency matrix, consuming a
pre-drawn uniform matrix (three uniforms per step, fixed layout) so runs
are bit-reproducible given the stream.  Sufficient statistics (edges,
two-stars, triangles) and degrees are maintained incrementally.

Dyads are indexed in upper-triangle row-major order.  The tie/no-tie
proposal keeps a permutation ``pool`` of dyad ids with edges in the
prefix ``pool[:ne]``; toggles swap across the boundary in O(1).
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def run_sampler(
    adj,
    deg,
    pool,
    pos,
    dy_i,
    dy_j,
    ne0,
    edges0,
    twostars0,
    triangles0,
    th_e,
    th_s2,
    th_tr,
    phi,
    uniforms,
    use_tnt,
    burn,
    n_draws,
    thin,
    out_deg,
    out_stats,
    out_codes,
    collect_codes,
):
    n = adj.shape[0]
    D = pool.shape[0]
    ne = ne0
    s_edges = edges0
    s_2s = twostars0
    s_tri = triangles0
    accepted = 0
    row = 0
    total = burn + n_draws * thin

    for step in range(total):
        u0 = uniforms[step, 0]
        u1 = uniforms[step, 1]
        u2 = uniforms[step, 2]

        if use_tnt:
            # pick a dyad and its forward proposal probability
            if ne == 0 or ne == D:
                slot = int(u1 * D)
                if slot >= D:
                    slot = D - 1
                log_qf = -math.log(D)
            elif u0 < 0.5:
                slot = int(u1 * ne)
                if slot >= ne:
                    slot = ne - 1
                log_qf = math.log(0.5 / ne)
            else:
                nn = D - ne
                slot = ne + int(u1 * nn)
                if slot >= D:
                    slot = D - 1
                log_qf = math.log(0.5 / nn)
            k = pool[slot]
            i = dy_i[k]
            j = dy_j[k]
            adding = adj[i, j] == 0

            common = 0
            for v in range(n):
                if adj[i, v] != 0 and adj[j, v] != 0:
                    common += 1
            if adding:
                d2 = deg[i] + deg[j]
                ne2 = ne + 1
            else:
                d2 = deg[i] + deg[j] - 2
                ne2 = ne - 1
            delta = th_e + th_s2 * d2 + th_tr * common + phi[i] + phi[j]
            dlogpot = delta if adding else -delta

            if ne2 == 0 or ne2 == D:
                log_qr = -math.log(D)
            elif adding:
                log_qr = math.log(0.5 / ne2)
            else:
                log_qr = math.log(0.5 / (D - ne2))

            if math.log(u2) < dlogpot + log_qr - log_qf:
                accepted += 1
                if adding:
                    # swap into the edge prefix
                    other = pool[ne]
                    pool[ne] = k
                    pool[slot] = other
                    pos[k] = ne
                    pos[other] = slot
                    ne += 1
                    adj[i, j] = 1
                    adj[j, i] = 1
                    deg[i] += 1
                    deg[j] += 1
                    s_edges += 1
                    s_2s += d2
                    s_tri += common
                else:
                    last = ne - 1
                    other = pool[last]
                    pool[last] = k
                    pool[slot] = other
                    pos[k] = last
                    pos[other] = slot
                    ne -= 1
                    adj[i, j] = 0
                    adj[j, i] = 0
                    deg[i] -= 1
                    deg[j] -= 1
                    s_edges -= 1
                    s_2s -= d2
                    s_tri -= common
        else:
            # Gibbs: resample one uniformly chosen dyad from its full conditional
            k = int(u0 * D)
            if k >= D:
                k = D - 1
            i = dy_i[k]
            j = dy_j[k]
            cur = adj[i, j] != 0

            common = 0
            for v in range(n):
                if adj[i, v] != 0 and adj[j, v] != 0:
                    common += 1
            if cur:
                d2 = deg[i] + deg[j] - 2
            else:
                d2 = deg[i] + deg[j]
            lam = th_e + th_s2 * d2 + th_tr * common + phi[i] + phi[j]
            want = u1 < 1.0 / (1.0 + math.exp(-lam))

            if want != cur:
                accepted += 1
                slot = pos[k]
                if want:
                    other = pool[ne]
                    pool[ne] = k
                    pool[slot] = other
                    pos[k] = ne
                    pos[other] = slot
                    ne += 1
                    adj[i, j] = 1
                    adj[j, i] = 1
                    deg[i] += 1
                    deg[j] += 1
                    s_edges += 1
                    s_2s += d2
                    s_tri += common
                else:
                    last = ne - 1
                    other = pool[last]
                    pool[last] = k
                    pool[slot] = other
                    pos[k] = last
                    pos[other] = slot
                    ne -= 1
                    adj[i, j] = 0
                    adj[j, i] = 0
                    deg[i] -= 1
                    deg[j] -= 1
                    s_edges -= 1
                    s_2s -= d2
                    s_tri -= common

        if step >= burn:
            k_since = step - burn + 1
            if k_since % thin == 0 and row < n_draws:
                for v in range(n):
                    out_deg[row, v] = deg[v]
                out_stats[row, 0] = s_edges
                out_stats[row, 1] = s_2s
                out_stats[row, 2] = s_tri
                if collect_codes:
                    code = np.uint64(0)
                    one = np.uint64(1)
                    for t in range(ne):
                        code |= one << np.uint64(pool[t])
                    out_codes[row] = code
                row += 1

    return ne, accepted
