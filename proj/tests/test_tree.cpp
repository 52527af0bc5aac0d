#include <catch2/catch_amalgamated.hpp>

#include <cstddef>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "stablecf/algebra.hpp"
#include "stablecf/exact.hpp"
#include "stablecf/tree.hpp"

using namespace stablecf;
using Catch::Matchers::WithinAbs;

namespace {

LinearStableModel tree_observation_model(double alpha, const Matrix& a,
                                         std::vector<StableParams> obs) {
    LinearStableModel m;
    m.alpha = alpha;
    m.A = a;
    m.side = Side::y;
    m.params = std::move(obs);
    for (std::size_t i = 0; i < m.params.size(); ++i) m.labels.push_back("y" + std::to_string(i));
    return m;
}

// observations generated by pushing known priors through the coupling, so
// the recovered marginals have a ground truth
LinearStableModel tree_forward_model(double alpha, const Matrix& a,
                                     const std::vector<StableParams>& priors) {
    LinearStableModel prior;
    prior.alpha = alpha;
    prior.A = a;
    prior.side = Side::x;
    prior.params = priors;
    for (std::size_t i = 0; i < priors.size(); ++i) prior.labels.push_back("x" + std::to_string(i));
    return tree_observation_model(alpha, a, forward_params(prior));
}

void check_params_close(const StableParams& got, const StableParams& want, double margin) {
    CHECK(got.alpha == want.alpha);
    CHECK_THAT(got.beta, WithinAbs(want.beta, margin));
    CHECK_THAT(got.gamma, WithinAbs(want.gamma, margin));
    CHECK_THAT(got.delta, WithinAbs(want.delta, margin));
}

Matrix chain_matrix(int n, double w) {
    Matrix a = Matrix::Identity(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = w;
        a(i + 1, i) = w;
    }
    return a;
}

// spanning tree with random attachment, both directions weighted
// independently with random signs; edge magnitudes are capped per node so
// every row of |A|^alpha stays strictly diagonally dominant, which keeps
// all cavity beliefs inside the stable family
Matrix random_tree_matrix(std::mt19937_64& g, int n, double alpha) {
    Matrix a = Matrix::Zero(n, n);
    std::vector<int> parent(n, -1), deg(n, 0);
    for (int i = 1; i < n; ++i) {
        parent[i] = testutil::uniform_int(g, 0, i - 1);
        ++deg[i];
        ++deg[parent[i]];
    }
    for (int i = 0; i < n; ++i) a(i, i) = testutil::uniform(g, 0.9, 1.4);
    for (int i = 1; i < n; ++i) {
        const int p = parent[i];
        auto cap = [&](int node) {
            return std::pow(0.85 * std::pow(a(node, node), alpha) / deg[node], 1.0 / alpha);
        };
        const double top = std::min(cap(i), cap(p));
        const double m1 = testutil::uniform(g, 0.2 * top, top);
        const double m2 = testutil::uniform(g, 0.2 * top, top);
        a(i, p) = testutil::uniform_int(g, 0, 1) ? m1 : -m1;
        a(p, i) = testutil::uniform_int(g, 0, 1) ? m2 : -m2;
    }
    return a;
}

bool graph_edge(const Matrix& a, int i, int j) { return a(i, j) != 0.0 || a(j, i) != 0.0; }

const Message& find_message(const TreeResult& res, int from, int to) {
    for (const Message& msg : res.messages) {
        if (msg.from == from && msg.to == to) return msg;
    }
    FAIL("no message " << from << " -> " << to);
    return res.messages.front();
}

}  // namespace

TEST_CASE("acyclic connected couplings certify with a rooted orientation") {
    const Matrix a = chain_matrix(4, 0.5);

    TreeCertificate cert = check_tree(a);
    REQUIRE(cert.is_tree);
    CHECK(cert.root == 0);
    REQUIRE(cert.order.size() == 4);
    CHECK(cert.order[0] == 0);
    CHECK(cert.parent[0] == -1);
    CHECK(cert.cycle.empty());
    CHECK(cert.unreachable.empty());
    std::vector<int> seen_at(4, -1);
    for (std::size_t i = 0; i < cert.order.size(); ++i) seen_at[cert.order[i]] = static_cast<int>(i);
    for (int i = 0; i < 4; ++i) {
        if (i == cert.root) continue;
        const int p = cert.parent[i];
        CHECK(graph_edge(a, i, p));
        CHECK(seen_at[p] < seen_at[i]);
    }

    TreeCertificate rerooted = check_tree(a, 3);
    REQUIRE(rerooted.is_tree);
    CHECK(rerooted.root == 3);
    CHECK(rerooted.parent[3] == -1);
    CHECK(rerooted.order[0] == 3);
}

TEST_CASE("a coupling loop comes back as the offending cycle") {
    Matrix a(3, 3);
    a << 7, -1, 3, -1, 7, 5, 3, -5, 7;
    a /= 7.0;

    TreeCertificate cert = check_tree(a);
    REQUIRE_FALSE(cert.is_tree);
    REQUIRE(cert.cycle.size() == 3);
    CHECK(cert.unreachable.empty());
    for (std::size_t i = 0; i < cert.cycle.size(); ++i) {
        const int from = cert.cycle[i];
        const int to = cert.cycle[(i + 1) % cert.cycle.size()];
        CHECK(from != to);
        CHECK(graph_edge(a, from, to));
    }
}

TEST_CASE("independent coordinates are flagged disconnected") {
    TreeCertificate cert = check_tree(Matrix::Identity(3, 3));
    REQUIRE_FALSE(cert.is_tree);
    CHECK(cert.cycle.empty());
    CHECK(cert.unreachable == std::vector<int>{1, 2});

    TreeCertificate single = check_tree(Matrix::Identity(1, 1) * 2.0);
    CHECK(single.is_tree);
    CHECK(single.order == std::vector<int>{0});
}

TEST_CASE("the model wrapper enforces tree shape and parameter side") {
    Matrix loop(3, 3);
    loop << 7, -1, 3, -1, 7, 5, 3, -5, 7;
    loop /= 7.0;
    std::vector<StableParams> obs(3, StableParams{1.5, 0.0, 1.0, 0.0});
    CHECK_THROWS_AS(make_tree_model(tree_observation_model(1.5, loop, obs)), NotATree);
    CHECK_THROWS_AS(make_tree_model(tree_observation_model(1.5, Matrix::Identity(3, 3), obs)),
                    NotATree);

    LinearStableModel prior;
    prior.alpha = 1.5;
    prior.A = chain_matrix(3, 0.4);
    prior.side = Side::x;
    prior.params = obs;
    prior.labels = {"x0", "x1", "x2"};
    TreeModel tm = make_tree_model(prior);
    CHECK_THROWS_AS(csp_run(tm), UnsupportedFeature);
}

TEST_CASE("a single node hands back its observation through the self weight") {
    const StableParams obs{1.5, 0.3, 2.0, -1.0};

    TreeModel plain = make_tree_model(
        tree_observation_model(1.5, Matrix::Identity(1, 1), {obs}));
    TreeResult res = csp_run(plain);
    REQUIRE(res.marginals.size() == 1);
    CHECK(res.messages.empty());
    check_params_close(res.marginals[0], obs, 1e-15);

    TreeModel scaled = make_tree_model(
        tree_observation_model(1.5, Matrix::Identity(1, 1) * 2.0, {obs}));
    check_params_close(csp_run(scaled).marginals[0], scale_shift(obs, 0.5, 0.0), 1e-14);
}

TEST_CASE("the symmetric three-node chain matches the closed form tightly") {
    const Matrix a = chain_matrix(3, 0.5);
    std::vector<StableParams> obs = {
        {2.0, 0.0, 1.1, 0.4}, {2.0, 0.0, 0.9, -0.2}, {2.0, 0.0, 1.3, 1.0}};
    LinearStableModel m = tree_observation_model(2.0, a, obs);

    TreeResult res = csp_run(make_tree_model(m));
    PosteriorResult exact = posterior_params(m);
    REQUIRE(res.marginals.size() == 3);
    for (int i = 0; i < 3; ++i) {
        check_params_close(res.marginals[i], exact.x_given_y[i], 1e-10);
    }
}

TEST_CASE("a two-node run is one scaling and one addition") {
    Matrix a(2, 2);
    a << 1.5, 0.6, -0.4, 1.1;
    std::vector<StableParams> priors = {{1.5, 0.4, 1.2, 0.7}, {1.5, -0.7, 0.8, -0.3}};
    LinearStableModel m = tree_forward_model(1.5, a, priors);

    TreeResult res = csp_run(make_tree_model(m));
    REQUIRE(res.messages.size() == 2);

    // each cavity is the neighbor's observation pulled back through its own
    // self weight, nothing else
    check_params_close(find_message(res, 1, 0).payload,
                       scale_shift(m.params[1], 1.0 / a(1, 1), 0.0), 1e-12);
    check_params_close(find_message(res, 0, 1).payload,
                       scale_shift(m.params[0], 1.0 / a(0, 0), 0.0), 1e-12);

    // pushing the marginals forward through each observation row recomposes
    // that observation
    for (int i = 0; i < 2; ++i) {
        const StableParams recomposed =
            add(scale_shift(res.marginals[i], a(i, i), 0.0),
                scale_shift(res.marginals[1 - i], a(i, 1 - i), 0.0));
        check_params_close(recomposed, m.params[i], 1e-12);
    }
}

TEST_CASE("every message schedule computes identical marginals") {
    auto g = testutil::rng(411);
    for (double alpha : {1.5, 1.0}) {
        const int n = alpha == 1.0 ? 7 : 9;
        const Matrix a = random_tree_matrix(g, n, alpha);
        std::vector<StableParams> priors;
        for (int i = 0; i < n; ++i) priors.push_back(testutil::random_params(g, alpha));
        LinearStableModel m = tree_forward_model(alpha, a, priors);

        TreeResult base = csp_run(make_tree_model(m, 0));
        for (int root : {n / 2, n - 1}) {
            TreeResult other = csp_run(make_tree_model(m, root));
            REQUIRE(other.marginals.size() == base.marginals.size());
            for (int i = 0; i < n; ++i) {
                CHECK(other.marginals[i].beta == base.marginals[i].beta);
                CHECK(other.marginals[i].gamma == base.marginals[i].gamma);
                CHECK(other.marginals[i].delta == base.marginals[i].delta);
            }
            REQUIRE(other.messages.size() == base.messages.size());
            for (const Message& msg : other.messages) {
                const Message& twin = find_message(base, msg.from, msg.to);
                CHECK(msg.payload.beta == twin.payload.beta);
                CHECK(msg.payload.gamma == twin.payload.gamma);
                CHECK(msg.payload.delta == twin.payload.delta);
            }
        }
    }
}

TEST_CASE("random tree marginals agree with the exact posterior") {
    auto g = testutil::rng(412);
    for (double alpha : testutil::alpha_grid()) {
        for (int rep = 0; rep < 15; ++rep) {
            const int n = testutil::uniform_int(g, 2, 20);
            const Matrix a = random_tree_matrix(g, n, alpha);
            std::vector<StableParams> priors;
            for (int i = 0; i < n; ++i) priors.push_back(testutil::random_params(g, alpha));
            LinearStableModel m = tree_forward_model(alpha, a, priors);

            TreeResult res = csp_run(make_tree_model(m, testutil::uniform_int(g, 0, n - 1)));
            PosteriorResult exact = posterior_params(m);
            REQUIRE(res.messages.size() == static_cast<std::size_t>(2 * (n - 1)));
            for (int i = 0; i < n; ++i) {
                check_params_close(res.marginals[i], exact.x_given_y[i], 1e-9);
            }
        }
    }
}

TEST_CASE("skewed log-branch chains take the staged shift pass") {
    Matrix a(4, 4);
    a << 1.3, 0.3, 0, 0,
        -0.45, 0.8, 0.25, 0,
        0, 0.4, 1.1, -0.3,
        0, 0, 0.2, 0.9;
    std::vector<StableParams> priors = {
        {1.0, 0.6, 1.4, 0.5}, {1.0, -0.8, 0.7, -1.2}, {1.0, 0.2, 2.1, 3.0}, {1.0, 0.9, 0.5, 0.0}};
    LinearStableModel m = tree_forward_model(1.0, a, priors);

    TreeResult res = csp_run(make_tree_model(m));
    PosteriorResult exact = posterior_params(m);
    for (int i = 0; i < 4; ++i) {
        check_params_close(res.marginals[i], exact.x_given_y[i], 1e-9);
        check_params_close(res.marginals[i], priors[i], 1e-6);
    }
}

TEST_CASE("a cavity that leaves the stable family is reported") {
    Matrix a(3, 3);
    a << 1, 0.6, 0, 0.6, 1, 0.9, 0, 0.9, 1;
    std::vector<StableParams> obs = {
        {1.5, 0.0, 1.0, 0.0}, {1.5, 0.0, 0.2, 0.0}, {1.5, 0.0, 2.5, 0.0}};
    TreeModel tm = make_tree_model(tree_observation_model(1.5, a, obs));
    CHECK_THROWS_AS(csp_run(tm), NonphysicalScale);
}

TEST_CASE("an exactly cancelling elimination is reported singular") {
    Matrix a(2, 2);
    a << 1, 1, 1, 1;
    std::vector<StableParams> obs = {{1.5, 0.0, 1.0, 0.0}, {1.5, 0.0, 1.0, 0.0}};
    TreeModel tm = make_tree_model(tree_observation_model(1.5, a, obs));
    CHECK_THROWS_AS(csp_run(tm), SingularMatrix);
}
