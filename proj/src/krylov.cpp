#include "slabinv/krylov.hpp"

namespace slabinv {

namespace {

cplx cdot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s(0);
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double nrm2(const std::vector<cplx>& a) { return std::sqrt(std::abs(cdot(a, a))); }

void axpy(cplx alpha, const std::vector<cplx>& x, std::vector<cplx>& y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

KrylovResult gmres(const LinearMap& A, const LinearMap& M, const std::vector<cplx>& b,
                   std::vector<cplx>& x, double tol, int restart, int max_iters) {
    const size_t n = b.size();
    if (x.size() != n) x.assign(n, cplx(0));
    const double bnorm = nrm2(b);
    KrylovResult res;
    if (bnorm == 0.0) {
        x.assign(n, cplx(0));
        res.converged = true;
        return res;
    }

    std::vector<std::vector<cplx>> V(size_t(restart) + 1);
    std::vector<cplx> H(size_t(restart + 1) * restart, cplx(0));
    auto h = [&](int i, int j) -> cplx& { return H[size_t(i) * restart + j]; };
    std::vector<cplx> cs(restart), sn(restart), gvec(size_t(restart) + 1);
    std::vector<cplx> w(n), t(n);

    int total = 0;
    while (total < max_iters) {
        // r = b - A x
        A(x, w);
        std::vector<cplx> r(n);
        for (size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
        double beta = nrm2(r);
        res.residual = beta / bnorm;
        if (res.residual < tol) {
            res.converged = true;
            return res;
        }
        V[0] = r;
        for (auto& z : V[0]) z /= beta;
        std::fill(gvec.begin(), gvec.end(), cplx(0));
        gvec[0] = beta;
        std::fill(H.begin(), H.end(), cplx(0));

        int j = 0;
        for (; j < restart && total < max_iters; ++j, ++total) {
            M(V[size_t(j)], t);
            A(t, w);
            for (int i = 0; i <= j; ++i) {
                h(i, j) = cdot(V[size_t(i)], w);
                axpy(-h(i, j), V[size_t(i)], w);
            }
            h(j + 1, j) = nrm2(w);
            if (std::abs(h(j + 1, j)) > 0) {
                V[size_t(j) + 1] = w;
                for (auto& z : V[size_t(j) + 1]) z /= h(j + 1, j).real();
            } else {
                V[size_t(j) + 1].assign(n, cplx(0));
            }
            // apply stored Givens rotations, then form a new one
            for (int i = 0; i < j; ++i) {
                const cplx tmp = std::conj(cs[size_t(i)]) * h(i, j) +
                                 std::conj(sn[size_t(i)]) * h(i + 1, j);
                h(i + 1, j) = -sn[size_t(i)] * h(i, j) + cs[size_t(i)] * h(i + 1, j);
                h(i, j) = tmp;
            }
            const double denom = std::sqrt(std::norm(h(j, j)) + std::norm(h(j + 1, j)));
            if (denom > 0) {
                cs[size_t(j)] = h(j, j) / denom;
                sn[size_t(j)] = h(j + 1, j) / denom;
                h(j, j) = cplx(denom);
                h(j + 1, j) = cplx(0);
                const cplx tmp = std::conj(cs[size_t(j)]) * gvec[size_t(j)];
                gvec[size_t(j) + 1] = -sn[size_t(j)] * gvec[size_t(j)];
                gvec[size_t(j)] = tmp;
            }
            res.residual = std::abs(gvec[size_t(j) + 1]) / bnorm;
            if (res.residual < tol) {
                ++j;
                ++total;
                break;
            }
        }
        // back substitution for y, then x += M (V y)
        std::vector<cplx> y(size_t(j), cplx(0));
        for (int i = j - 1; i >= 0; --i) {
            cplx s = gvec[size_t(i)];
            for (int l = i + 1; l < j; ++l) s -= h(i, l) * y[size_t(l)];
            y[size_t(i)] = s / h(i, i);
        }
        std::vector<cplx> vy(n, cplx(0));
        for (int i = 0; i < j; ++i) axpy(y[size_t(i)], V[size_t(i)], vy);
        M(vy, t);
        for (size_t i = 0; i < n; ++i) x[i] += t[i];
        res.iterations = total;
        if (res.residual < tol) {
            // confirm with a true residual to guard against drift
            A(x, w);
            double rr = 0;
            for (size_t i = 0; i < n; ++i) rr += std::norm(b[i] - w[i]);
            res.residual = std::sqrt(rr) / bnorm;
            if (res.residual < 10 * tol) {
                res.converged = true;
                return res;
            }
        }
    }
    res.iterations = total;
    return res;
}

}  // namespace slabinv
