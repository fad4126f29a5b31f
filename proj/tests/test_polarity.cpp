#include "fixtures.hpp"
#include "oracles.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/polarity_coupling.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace embedgeom;

namespace {

EmbeddingStore named_store(Matrix<float> m, std::vector<std::string> names) {
    std::vector<double> f(names.size(), 1e-3);
    return EmbeddingStore::from_frequencies("p", std::move(m), names, f);
}

double abs_cos(const std::vector<double>& a, const std::vector<double>& b) {
    return std::abs(oracle::cosine(a.data(), b.data(), a.size()));
}

}  // namespace

TEST_CASE("antonym list parsing") {
    const auto dir = fixtures::scratch_dir("antonyms");
    write_file_atomic(dir / "a.tsv", "# comment\nhot\tcold\n\ncold\thot\nup\tdown\nsame\tsame\nup\tdown\r\n");
    const auto pairs = load_antonyms(dir / "a.tsv");
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == AntonymPair{"hot", "cold"});
    CHECK(pairs[1] == AntonymPair{"up", "down"});

    write_file_atomic(dir / "bad.tsv", "hot\tcold\nlonely\n");
    CHECK_THROWS_AS(load_antonyms(dir / "bad.tsv"), FormatError);
    CHECK_THROWS_AS(load_antonyms(dir / "missing.tsv"), IoError);
}

TEST_CASE("co-clustered pair selection") {
    Matrix<float> m(5, 2, std::vector<float>{1, 0, 1, 0.2f, 0, 1, 0.2f, 1, 5, 5});
    const auto store = named_store(m, {"hot", "cold", "up", "down", "odd"});
    ClusterModel model;
    model.k = 8;
    model.centroids = Matrix<double>(8, 2, 1.0);
    model.assignments = {7, 7, 2, 3, 7};

    const std::vector<AntonymPair> pairs{{"hot", "cold"}, {"up", "down"}, {"hot", "absent"}};
    const auto r = co_clustered_pairs(pairs, store, model);
    REQUIRE(r.by_cluster.count(7) == 1);
    CHECK(r.by_cluster.at(7).size() == 1);
    CHECK(r.by_cluster.at(7)[0].a == 0);
    CHECK(r.by_cluster.at(7)[0].b == 1);
    CHECK(r.coverage.total == 3);
    CHECK(r.coverage.missing_word == 1);
    CHECK(r.coverage.cross_cluster == 1);
    CHECK(r.coverage.co_clustered == 1);

    const std::vector<AntonymPair> straddle{{"up", "down"}, {"cold", "up"}};
    CHECK(co_clustered_pairs(straddle, store, model).by_cluster.empty());
}

TEST_CASE("polarity axis") {
    SUBCASE("parallel differences") {
        Matrix<float> m(6, 3, std::vector<float>{2, 1, 1, -1, 1, 1, 0, 3, 2, 5, 3, 2, 1, 0, 0, 0.5f, 0, 0});
        const std::vector<TokenPair> pairs{{0, 1}, {2, 3}, {4, 5}};
        const auto ax = polarity_axis(pairs, m.view());
        CHECK(std::abs(ax[0]) > 1.0 - 1e-9);
        // Swapping every pair gives the same axis up to sign.
        const std::vector<TokenPair> swapped{{1, 0}, {3, 2}, {5, 4}};
        CHECK(abs_cos(polarity_axis(swapped, m.view()), ax) > 1.0 - 1e-12);
    }
    SUBCASE("two orthogonal directions of unequal size") {
        // Differences 3 e1 and 1 e2: the symmetrized scatter matrix is diag(9, 1).
        Matrix<float> m(4, 2, std::vector<float>{3, 0, 0, 0, 0, 1, 0, 0});
        const std::vector<TokenPair> pairs{{0, 1}, {2, 3}};
        const auto ax = polarity_axis(pairs, m.view());
        CHECK(std::abs(ax[0]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(ax[1]) < 1e-9);
    }
    SUBCASE("errors") {
        Matrix<float> m(4, 2, std::vector<float>{1, 1, 1, 1, 2, 2, 2, 2});
        const std::vector<TokenPair> zero{{0, 1}, {2, 3}};
        CHECK_THROWS_AS(polarity_axis(zero, m.view()), DegenerateInput);
        const std::vector<TokenPair> one{{0, 2}};
        CHECK_THROWS_AS(polarity_axis(one, m.view()), InsufficientData);
    }
}

TEST_CASE("symmetric dipole gives alpha 2") {
    const std::size_t d = 4;
    const std::vector<double> mu{1, 2, 3, 4};
    const std::vector<double> u{0, 0.6, 0, 0.8};
    const double r = 2.0;
    Matrix<float> m(12, d);
    std::vector<std::string> names;
    std::vector<std::uint32_t> labels;
    for (std::size_t i = 0; i < 4; ++i) {
        for (int s : {1, -1}) {
            const auto row = names.size();
            for (std::size_t j = 0; j < d; ++j) m(row, j) = static_cast<float>(mu[j] + s * r * u[j]);
            names.push_back((s > 0 ? "a" : "b") + std::to_string(i));
            labels.push_back(0);
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const auto row = names.size();
        for (std::size_t j = 0; j < d; ++j) m(row, j) = static_cast<float>(-mu[j] + 0.1 * i);
        names.push_back("z" + std::to_string(i));
        labels.push_back(1);
    }
    const auto model = model_from_assignments(m.view(), labels, 2);
    const auto store = named_store(m, names);
    std::vector<AntonymPair> pairs;
    for (int i = 0; i < 4; ++i) pairs.push_back({"a" + std::to_string(i), "b" + std::to_string(i)});

    for (auto scope : {SpanScope::members, SpanScope::pair}) {
        PolarityConfig cfg;
        cfg.span_scope = scope;
        const auto res = compute_alpha(store, model, pairs, cfg);
        REQUIRE(res.per_cluster.size() == 1);
        const auto& c = res.per_cluster[0];
        CHECK(c.cluster_id == 0);
        CHECK(c.n_pairs == 4);
        CHECK(abs_cos(c.axis, u) > 1.0 - 1e-9);
        CHECK(c.span == doctest::Approx(2 * r).epsilon(1e-6));
        CHECK(c.radius == doctest::Approx(r).epsilon(1e-6));
        CHECK(c.alpha == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(c.alpha == doctest::Approx(c.span / c.radius).epsilon(1e-15));
        CHECK(res.n_alpha == res.per_cluster.size());
        CHECK(res.mean_alpha == c.alpha);
        CHECK(res.span_scope == scope);
        CHECK(std::isnan(res.cross_cluster_pair_cos));
    }
}

TEST_CASE("planted sphere cluster") {
    const auto p = fixtures::planted_polarity_sphere(24, 5);
    const auto res = compute_alpha(p.store, p.model, p.pairs);
    REQUIRE(res.per_cluster.size() == 1);
    const auto& c = res.per_cluster[0];
    CHECK(abs_cos(c.axis, p.axis) > 0.99);
    CHECK(c.radius == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(c.alpha == doctest::Approx(2.0).epsilon(0.01));

    SUBCASE("scaling every vector leaves alpha unchanged") {
        Matrix<float> m = p.store.matrix();
        for (auto& v : m.values()) v *= 4.0f;
        std::vector<std::string> names;
        for (const auto& t : p.store.tokens()) names.push_back(t.token);
        const auto model = model_from_assignments(m.view(), p.model.assignments, 2);
        const auto s = compute_alpha(named_store(std::move(m), names), model, p.pairs);
        CHECK(s.per_cluster[0].alpha == doctest::Approx(c.alpha).epsilon(1e-9));
    }
    SUBCASE("rotation leaves alpha unchanged and co-rotates the axis") {
        const std::size_t d = 24;
        std::mt19937_64 rng(8);
        std::normal_distribution<double> g(0.0, 1.0);
        Matrix<double> q(d, d);
        for (std::size_t col = 0; col < d; ++col) {
            std::vector<double> v(d);
            for (auto& x : v) x = g(rng);
            for (std::size_t prev = 0; prev < col; ++prev) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += v[j] * q(j, prev);
                for (std::size_t j = 0; j < d; ++j) v[j] -= dot * q(j, prev);
            }
            double n = 0.0;
            for (double x : v) n += x * x;
            for (std::size_t j = 0; j < d; ++j) q(j, col) = v[j] / std::sqrt(n);
        }
        Matrix<float> m(p.store.vocab_size(), d);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t a = 0; a < d; ++a) {
                double s = 0.0;
                for (std::size_t b = 0; b < d; ++b) s += q(a, b) * p.store.matrix()(i, b);
                m(i, a) = static_cast<float>(s);
            }
        }
        std::vector<std::string> names;
        for (const auto& t : p.store.tokens()) names.push_back(t.token);
        const auto model = model_from_assignments(m.view(), p.model.assignments, 2);
        const auto s = compute_alpha(named_store(std::move(m), names), model, p.pairs);
        CHECK(std::abs(s.per_cluster[0].alpha - c.alpha) < 1e-5);
        std::vector<double> rotated(d, 0.0);
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) rotated[a] += q(a, b) * c.axis[b];
        }
        CHECK(abs_cos(s.per_cluster[0].axis, rotated) > 1.0 - 1e-6);
    }
}

TEST_CASE("translation leaves alpha unchanged") {
    const auto p = fixtures::planted_polarity_sphere(8, 11);
    Matrix<float> m = p.store.matrix();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += 0.5f;
    }
    std::vector<std::string> names;
    for (const auto& t : p.store.tokens()) names.push_back(t.token);
    const auto model = model_from_assignments(m.view(), p.model.assignments, 2);
    const auto a = compute_alpha(p.store, p.model, p.pairs);
    const auto b = compute_alpha(named_store(std::move(m), names), model, p.pairs);
    CHECK(b.per_cluster[0].alpha == doctest::Approx(a.per_cluster[0].alpha).epsilon(1e-5));
}

TEST_CASE("mean alpha and pair similarities over several clusters") {
    // Three dipole clusters of different radii along different axes plus one cross pair.
    const std::size_t d = 6;
    Matrix<float> m(3 * 6 + 2, d);
    std::vector<std::string> names;
    std::vector<std::uint32_t> labels;
    std::vector<AntonymPair> pairs;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < 3; ++i) {
            for (int s : {1, -1}) {
                const auto row = names.size();
                m(row, c) = 10.0f;
                m(row, 3 + c) = static_cast<float>(s * (1.0 + c) * (i == 0 ? 1.0 : 0.5));
                names.push_back("c" + std::to_string(c) + (s > 0 ? "p" : "n") + std::to_string(i));
                labels.push_back(static_cast<std::uint32_t>(c));
            }
            pairs.push_back({"c" + std::to_string(c) + "p" + std::to_string(i), "c" + std::to_string(c) + "n" + std::to_string(i)});
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        const auto row = names.size();
        m(row, i) = 10.0f;
        m(row, 3 + i) = 0.1f;
        names.push_back("x" + std::to_string(i));
        labels.push_back(static_cast<std::uint32_t>(i));
    }
    pairs.push_back({"x0", "x1"});
    pairs.push_back({"c0p0", "nowhere"});
    const auto store = named_store(m, names);
    const auto model = model_from_assignments(m.view(), labels, 3);
    const auto res = compute_alpha(store, model, pairs);
    REQUIRE(res.n_alpha == 3);
    double sum = 0.0;
    for (const auto& c : res.per_cluster) sum += c.alpha;
    CHECK(res.mean_alpha == doctest::Approx(sum / 3).epsilon(1e-14));
    CHECK(res.coverage.missing_word == 1);
    CHECK(res.coverage.cross_cluster == 1);
    CHECK(res.coverage.co_clustered == 9);

    // Cross-cluster pair x0/x1: vectors (10, 0, ..., 0.1, 0) and (0, 10, ..., 0, 0.1).
    CHECK(res.cross_cluster_pair_cos == doctest::Approx(0.0).epsilon(1e-12));
    double same = 0.0;
    for (const auto& pr : pairs) {
        const auto a = store.find(pr.word_a), b = store.find(pr.word_b);
        if (!a || !b || labels[*a] != labels[*b]) continue;
        std::vector<double> va(store.matrix().row(*a).begin(), store.matrix().row(*a).end());
        std::vector<double> vb(store.matrix().row(*b).begin(), store.matrix().row(*b).end());
        same += oracle::cosine(va.data(), vb.data(), d) / 9.0;
    }
    CHECK(res.same_cluster_pair_cos == doctest::Approx(same).epsilon(1e-12));

    PolarityConfig strict;
    strict.min_pairs = 4;
    CHECK_THROWS_AS(compute_alpha(store, model, pairs, strict), InsufficientData);
    CHECK_THROWS_AS(compute_alpha(store, model, {}), InsufficientData);
}

TEST_CASE("span scope names") {
    CHECK(parse_span_scope("members") == SpanScope::members);
    CHECK(parse_span_scope("pair") == SpanScope::pair);
    CHECK(std::string(to_string(SpanScope::pair)) == "pair");
    CHECK_THROWS(parse_span_scope("all"));
}
