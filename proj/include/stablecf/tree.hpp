#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stablecf/algebra.hpp"
#include "stablecf/errors.hpp"
#include "stablecf/exact.hpp"
#include "stablecf/matrix.hpp"
#include "stablecf/model.hpp"
#include "stablecf/params.hpp"

// Exact posterior recovery on tree-coupled models by message passing. Each
// directed edge i -> j carries the cavity belief of x_i computed from the
// subtree behind the edge; combining the cavity beliefs of all neighbors
// reproduces the closed-form posterior exactly, in 2(n - 1) messages.
//
// The passes run in the coordinates (u, v, wt) with u = gamma^alpha,
// v = beta gamma^alpha and wt = delta - tan(pi alpha/2) beta gamma. The
// first two are the usual transformed parameters; wt is the shift with the
// skew correction folded in, chosen because in it sums of independents and
// scalings are both exactly linear: wt(aX) = a wt(X) and
// wt(X1 + X2) = wt(X1) + wt(X2), with no cross term. The three posterior
// systems therefore decouple into three independent tree eliminations
// sharing one leaf-to-root, root-to-leaves schedule. At alpha = 1 the
// scaling law gains a log term, wt(aX) = a wt(X) - (2/pi) a log|a| beta
// gamma, whose weights depend on the recovered skews; the shift block then
// runs as a second staged round over the same schedule once the scale and
// skew blocks are solved.

namespace stablecf {

class NotATree : public ModelShapeError {
  public:
    using ModelShapeError::ModelShapeError;
};

// Outcome of the acyclicity check. When is_tree holds, parent and order give
// a rooted orientation (parents precede children in order); otherwise
// exactly one of cycle or unreachable is non-empty and says why not.
struct TreeCertificate {
    bool is_tree = false;
    int root = 0;
    std::vector<int> parent;       // -1 at the root
    std::vector<int> order;        // breadth-first from the root
    std::vector<int> cycle;        // consecutive entries adjacent, closed at the ends
    std::vector<int> unreachable;  // nodes the root cannot reach
};

inline TreeCertificate check_tree(const Matrix& a, int root = 0) {
    if (a.rows() != a.cols()) throw ModelShapeError("tree check requires a square matrix");
    const int n = static_cast<int>(a.rows());
    if (root < 0 || root >= n) {
        throw ModelShapeError("root " + std::to_string(root) + " out of range for " +
                              std::to_string(n) + " nodes");
    }
    const auto adj = build_graph(a);

    TreeCertificate cert;
    cert.root = root;
    cert.parent.assign(static_cast<std::size_t>(n), -2);  // -2 marks undiscovered
    cert.parent[static_cast<std::size_t>(root)] = -1;
    cert.order.push_back(root);
    for (std::size_t head = 0; head < cert.order.size(); ++head) {
        const int i = cert.order[head];
        for (int k : adj[static_cast<std::size_t>(i)]) {
            if (cert.parent[static_cast<std::size_t>(k)] == -2) {
                cert.parent[static_cast<std::size_t>(k)] = i;
                cert.order.push_back(k);
                continue;
            }
            if (k == cert.parent[static_cast<std::size_t>(i)]) continue;
            // k was reached twice; join the two discovery paths at their
            // lowest common ancestor to exhibit the cycle
            std::vector<int> anc_pos(static_cast<std::size_t>(n), -1);
            std::vector<int> up_i;
            for (int c = i; c != -1; c = cert.parent[static_cast<std::size_t>(c)]) {
                anc_pos[static_cast<std::size_t>(c)] = static_cast<int>(up_i.size());
                up_i.push_back(c);
            }
            std::vector<int> up_k;
            int lca = k;
            while (anc_pos[static_cast<std::size_t>(lca)] == -1) {
                up_k.push_back(lca);
                lca = cert.parent[static_cast<std::size_t>(lca)];
            }
            cert.cycle.assign(up_i.begin(),
                              up_i.begin() + anc_pos[static_cast<std::size_t>(lca)] + 1);
            cert.cycle.insert(cert.cycle.end(), up_k.rbegin(), up_k.rend());
            return cert;
        }
    }
    if (static_cast<int>(cert.order.size()) < n) {
        for (int i = 0; i < n; ++i) {
            if (cert.parent[static_cast<std::size_t>(i)] == -2) cert.unreachable.push_back(i);
        }
        return cert;
    }
    cert.is_tree = true;
    return cert;
}

struct TreeModel {
    LinearStableModel model;
    TreeCertificate tree;
};

inline TreeModel make_tree_model(LinearStableModel m, int root = 0) {
    validate_model(m);
    TreeCertificate cert = check_tree(m.A, root);
    if (!cert.is_tree) {
        if (!cert.cycle.empty()) {
            std::string nodes;
            for (int c : cert.cycle) nodes += (nodes.empty() ? "" : " ") + std::to_string(c);
            throw NotATree("coupling graph has a cycle through nodes " + nodes);
        }
        throw NotATree("coupling graph is disconnected; " +
                       std::to_string(cert.unreachable.size()) +
                       " nodes unreachable from root " + std::to_string(root));
    }
    return {std::move(m), std::move(cert)};
}

// Directed-edge message: the cavity belief of x_{from} given the subtree on
// the far side of the edge from `to`.
struct Message {
    int from = 0;
    int to = 0;
    StableParams payload;
};

struct TreeResult {
    std::vector<StableParams> marginals;
    std::vector<Message> messages;  // leaf-to-root phase first, then root-to-leaves
};

namespace detail {

inline double abs_pow0(double x, double alpha) {
    return x == 0.0 ? 0.0 : std::pow(std::fabs(x), alpha);
}

}  // namespace detail

inline TreeResult csp_run(const TreeModel& tm) {
    const LinearStableModel& m = tm.model;
    validate_model(m);
    if (m.side != Side::y)
        throw UnsupportedFeature("message passing needs y-side parameters");
    if (!tm.tree.is_tree) throw NotATree("model graph is not a tree");
    const int n = static_cast<int>(m.n());
    if (static_cast<int>(tm.tree.order.size()) != n)
        throw ModelShapeError("tree orientation does not match the model size");

    const double alpha = m.alpha;
    const bool logb = log_branch(alpha);
    const auto adj = build_graph(m.A);

    // node-local constants: diagonal weights of the three systems, row-sum
    // scales for the pivot guards, transformed observations
    Vector pd(n), sd(n), ad(n), rs_p(n), rs_a(n), uy(n), vy(n), wty(n);
    for (int i = 0; i < n; ++i) {
        const double aii = m.A(i, i);
        if (aii == 0.0) {
            throw SingularMatrix("node " + std::to_string(i) +
                                 " has no self weight; cavity elimination cannot pivot");
        }
        pd(i) = detail::abs_pow0(aii, alpha);
        sd(i) = sign_of(aii) * pd(i);
        ad(i) = aii;
        rs_p(i) = 0.0;
        rs_a(i) = 0.0;
        for (int j = 0; j < n; ++j) {
            rs_p(i) += detail::abs_pow0(m.A(i, j), alpha);
            rs_a(i) += std::fabs(m.A(i, j));
        }
        const StableParams& p = m.params[static_cast<std::size_t>(i)];
        const TransformedParams t = to_transformed(p);
        uy(i) = t.u;
        vy(i) = t.v;
        wty(i) = logb ? p.delta - (2.0 / kPi) * p.beta * xlogx(p.gamma)
                      : p.delta - skew_tangent(alpha) * p.beta * p.gamma;
    }

    // directed edge ids and per-edge slots
    Eigen::MatrixXi did = Eigen::MatrixXi::Constant(n, n, -1);
    int edge_count = 0;
    for (int i = 0; i < n; ++i) {
        for (int k : adj[static_cast<std::size_t>(i)]) did(i, k) = edge_count++;
    }
    std::vector<double> cu(static_cast<std::size_t>(edge_count)),
        cv(static_cast<std::size_t>(edge_count)), cwt(static_cast<std::size_t>(edge_count)),
        gp(static_cast<std::size_t>(edge_count)), gs(static_cast<std::size_t>(edge_count)),
        ga(static_cast<std::size_t>(edge_count));
    std::vector<StableParams> payload(static_cast<std::size_t>(edge_count));

    auto pivot = [](double eff, double scale, const char* what, int node) {
        if (std::fabs(eff) < kPivotRelTol * scale) {
            throw SingularMatrix(std::string(what) + " system pivot vanished eliminating node " +
                                 std::to_string(node));
        }
    };

    // shift of the cavity/marginal law recovered from its wt coordinate
    auto shift_back = [&](double u, double v, double wt) {
        if (logb) return wt + (2.0 / kPi) * (u > 0.0 ? v * std::log(u) : 0.0);
        return wt + skew_tangent(alpha) * (u > 0.0 ? v * std::pow(u, (1.0 - alpha) / alpha) : 0.0);
    };

    // scale and skew elimination for the message i -> j (at alpha != 1 the
    // shift rides along, its system being fully decoupled); neighbor sums
    // run in ascending k so every schedule computes identical values
    auto sweep = [&](int i, int j) {
        double peff = pd(i), seff = sd(i), aeff = ad(i);
        double ueff = uy(i), veff = vy(i), wteff = wty(i);
        for (int k : adj[static_cast<std::size_t>(i)]) {
            if (k == j) continue;
            const int e = did(k, i);
            peff -= gp[static_cast<std::size_t>(e)];
            seff -= gs[static_cast<std::size_t>(e)];
            aeff -= ga[static_cast<std::size_t>(e)];
            const double w = m.A(i, k);
            const double wa = detail::abs_pow0(w, alpha);
            ueff -= wa * cu[static_cast<std::size_t>(e)];
            veff -= sign_of(w) * wa * cv[static_cast<std::size_t>(e)];
            if (!logb) wteff -= w * cwt[static_cast<std::size_t>(e)];
        }
        pivot(peff, rs_p(i), "scale", i);
        pivot(seff, rs_p(i), "skew", i);
        const int e = did(i, j);
        cu[static_cast<std::size_t>(e)] = ueff / peff;
        cv[static_cast<std::size_t>(e)] = veff / seff;
        if (!logb) {
            pivot(aeff, rs_a(i), "shift", i);
            cwt[static_cast<std::size_t>(e)] = wteff / aeff;
        }
        const double loop = m.A(i, j) * m.A(j, i);
        const double la = detail::abs_pow0(loop, alpha);
        gp[static_cast<std::size_t>(e)] = la / peff;
        gs[static_cast<std::size_t>(e)] = sign_of(loop) * la / seff;
        ga[static_cast<std::size_t>(e)] = loop / aeff;
        // the cavity belief must be a genuine stable law; a negative scale
        // or out-of-range skew here means the combine left the family
        if (logb) {
            (void)from_transformed({cu[static_cast<std::size_t>(e)],
                                    cv[static_cast<std::size_t>(e)], 0.0},
                                   alpha);
        } else {
            payload[static_cast<std::size_t>(e)] = from_transformed(
                {cu[static_cast<std::size_t>(e)], cv[static_cast<std::size_t>(e)],
                 shift_back(cu[static_cast<std::size_t>(e)], cv[static_cast<std::size_t>(e)],
                            cwt[static_cast<std::size_t>(e)])},
                alpha);
        }
    };

    const std::vector<int>& order = tm.tree.order;
    const std::vector<int>& parent = tm.tree.parent;
    for (std::size_t idx = order.size(); idx-- > 1;) {
        const int i = order[idx];
        sweep(i, parent[static_cast<std::size_t>(i)]);
    }
    for (std::size_t idx = 1; idx < order.size(); ++idx) {
        const int i = order[idx];
        sweep(parent[static_cast<std::size_t>(i)], i);
    }

    // marginal combine of all incoming cavities at node i for the scale and
    // skew blocks
    Vector ux(n), vx(n);
    for (int i = 0; i < n; ++i) {
        double peff = pd(i), seff = sd(i), ueff = uy(i), veff = vy(i);
        for (int k : adj[static_cast<std::size_t>(i)]) {
            const int e = did(k, i);
            peff -= gp[static_cast<std::size_t>(e)];
            seff -= gs[static_cast<std::size_t>(e)];
            const double w = m.A(i, k);
            const double wa = detail::abs_pow0(w, alpha);
            ueff -= wa * cu[static_cast<std::size_t>(e)];
            veff -= sign_of(w) * wa * cv[static_cast<std::size_t>(e)];
        }
        pivot(peff, rs_p(i), "scale", i);
        pivot(seff, rs_p(i), "skew", i);
        ux(i) = ueff / peff;
        vx(i) = veff / seff;
    }

    if (logb) {
        // staged second round: with the skew field known, the log terms of
        // the alpha = 1 scaling law become a fixed right-hand-side
        // adjustment and the shift block eliminates like the others
        Vector rhs = wty;
        for (int i = 0; i < n; ++i) {
            double c = m.A(i, i) * std::log(std::fabs(m.A(i, i))) * vx(i);
            for (int k : adj[static_cast<std::size_t>(i)]) {
                const double w = m.A(i, k);
                if (w != 0.0) c += w * std::log(std::fabs(w)) * vx(k);
            }
            rhs(i) += (2.0 / kPi) * c;
        }
        auto sweep_shift = [&](int i, int j) {
            double aeff = ad(i), wteff = rhs(i);
            for (int k : adj[static_cast<std::size_t>(i)]) {
                if (k == j) continue;
                const int e = did(k, i);
                aeff -= ga[static_cast<std::size_t>(e)];
                wteff -= m.A(i, k) * cwt[static_cast<std::size_t>(e)];
            }
            pivot(aeff, rs_a(i), "shift", i);
            cwt[static_cast<std::size_t>(did(i, j))] = wteff / aeff;
        };
        for (std::size_t idx = order.size(); idx-- > 1;) {
            const int i = order[idx];
            sweep_shift(i, parent[static_cast<std::size_t>(i)]);
        }
        for (std::size_t idx = 1; idx < order.size(); ++idx) {
            const int i = order[idx];
            sweep_shift(parent[static_cast<std::size_t>(i)], i);
        }
        for (int e = 0; e < edge_count; ++e) {
            payload[static_cast<std::size_t>(e)] = from_transformed(
                {cu[static_cast<std::size_t>(e)], cv[static_cast<std::size_t>(e)],
                 shift_back(cu[static_cast<std::size_t>(e)], cv[static_cast<std::size_t>(e)],
                            cwt[static_cast<std::size_t>(e)])},
                alpha);
        }
        wty = rhs;
    }

    TreeResult res;
    res.marginals.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double aeff = ad(i), wteff = wty(i);
        for (int k : adj[static_cast<std::size_t>(i)]) {
            const int e = did(k, i);
            aeff -= ga[static_cast<std::size_t>(e)];
            wteff -= m.A(i, k) * cwt[static_cast<std::size_t>(e)];
        }
        pivot(aeff, rs_a(i), "shift", i);
        const double wt = wteff / aeff;
        res.marginals[static_cast<std::size_t>(i)] =
            from_transformed({ux(i), vx(i), shift_back(ux(i), vx(i), wt)}, alpha);
    }
    for (std::size_t idx = order.size(); idx-- > 1;) {
        const int i = order[idx];
        const int j = parent[static_cast<std::size_t>(i)];
        res.messages.push_back({i, j, payload[static_cast<std::size_t>(did(i, j))]});
    }
    for (std::size_t idx = 1; idx < order.size(); ++idx) {
        const int i = order[idx];
        const int j = parent[static_cast<std::size_t>(i)];
        res.messages.push_back({j, i, payload[static_cast<std::size_t>(did(j, i))]});
    }
    return res;
}

}  // namespace stablecf
