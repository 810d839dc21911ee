#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "tsrate/causal.hpp"
#include "tsrate/rng.hpp"

using namespace tsrate;

namespace {

std::string unit_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%06zu", i);
    return buf;
}

// Pool with three classes; treatment probability and outcome offsets are per
// class. Outcome = class_effect + treatment_effect * treated + noise.
std::vector<CausalUnit> synthetic_pool(std::size_t n,
                                       const std::map<std::string, double>& treat_prob,
                                       const std::map<std::string, double>& class_effect,
                                       double treatment_effect, double noise_sd,
                                       std::uint64_t seed) {
    RngStream stream(seed);
    std::vector<std::string> classes;
    for (const auto& [z, _] : treat_prob) classes.push_back(z);
    std::vector<CausalUnit> pool(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& u = pool[i];
        u.window_id = unit_id(i);
        u.z_class = classes[stream.uniform_index(classes.size())];
        u.treated = stream.uniform01() < treat_prob.at(u.z_class);
        u.outcome = class_effect.at(u.z_class) +
                    (u.treated ? treatment_effect : 0.0) + stream.normal(0.0, noise_sd);
    }
    return pool;
}

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b) {
    double tv = 0.0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        tv += std::fabs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : b)
        if (!a.count(k)) tv += v;
    return tv / 2.0;
}

std::map<std::string, double> class_distribution(const std::vector<CausalUnit>& units) {
    std::map<std::string, double> dist;
    for (const auto& u : units) dist[u.z_class] += 1.0;
    for (auto& [_, v] : dist) v /= static_cast<double>(units.size());
    return dist;
}

}  // namespace

TEST_CASE("weighted sampling is deterministic and respects weights") {
    const auto pool = synthetic_pool(
        4000, {{"a", 0.5}, {"b", 0.5}, {"c", 0.5}},
        {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}}, 1.0, 1.0, 301);

    DistributionSpec spec;
    spec.tag = "DC1";
    spec.favored_value = "a";
    spec.sample_size = 2000;
    spec.seed = 5;
    const auto sampled = build_distribution(pool, spec);
    REQUIRE(sampled.size() == 2000);
    REQUIRE(build_distribution(pool, spec).size() == 2000);
    // same seed, same sample
    const auto again = build_distribution(pool, spec);
    for (std::size_t i = 0; i < sampled.size(); ++i)
        REQUIRE(sampled[i].window_id == again[i].window_id);

    // favored treated rows are over-represented relative to the pool
    auto fraction_favored_treated = [](const std::vector<CausalUnit>& units) {
        std::size_t k = 0;
        for (const auto& u : units) k += u.treated && u.z_class == "a";
        return static_cast<double>(k) / static_cast<double>(units.size());
    };
    double avg = 0.0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        DistributionSpec rep = spec;
        rep.seed = 1000 + s;
        avg += fraction_favored_treated(build_distribution(pool, rep));
    }
    avg /= 40.0;
    REQUIRE(avg > fraction_favored_treated(pool) + 0.01);
}

TEST_CASE("uniform weights reproduce pool proportions") {
    const auto pool = synthetic_pool(
        3000, {{"a", 0.3}, {"b", 0.3}, {"c", 0.3}},
        {{"a", 1.0}, {"b", 2.0}, {"c", 3.0}}, 1.0, 0.5, 307);
    DistributionSpec spec;
    spec.tag = "D0";
    spec.favored_value.clear();  // uniform
    spec.sample_size = 1500;
    const auto pool_dist = class_distribution(pool);
    double tv_sum = 0.0;
    for (std::uint64_t s = 0; s < 30; ++s) {
        DistributionSpec rep = spec;
        rep.seed = s;
        tv_sum += total_variation(class_distribution(build_distribution(pool, rep)),
                                  pool_dist);
    }
    REQUIRE(tv_sum / 30.0 < 0.03);
}

TEST_CASE("sampling errors") {
    auto pool = synthetic_pool(100, {{"a", 0.5}, {"b", 0.5}},
                               {{"a", 0.0}, {"b", 0.0}}, 1.0, 1.0, 311);
    DistributionSpec spec;
    spec.tag = "DC1";
    spec.favored_value = "a";
    spec.sample_size = 1000;
    REQUIRE_THROWS_AS(build_distribution(pool, spec), Error);  // sample > pool

    spec.sample_size = 50;
    spec.favored_value = "zzz";
    REQUIRE_THROWS_AS(build_distribution(pool, spec), Error);  // unknown favored

    // a class whose rows are all treated has no control stratum
    for (auto& u : pool)
        if (u.z_class == "b") u.treated = true;
    spec.favored_value = "a";
    REQUIRE_THROWS_WITH(build_distribution(pool, spec),
                        Catch::Matchers::ContainsSubstring("'b'"));
}

TEST_CASE("logistic regression recovers class treatment rates") {
    const auto pool = synthetic_pool(
        10000, {{"a", 2.0 / 3.0}, {"b", 1.0 / 3.0}, {"c", 1.0 / 3.0}},
        {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}}, 0.0, 1.0, 313);
    const PropensityModel model = fit_logistic(pool);
    std::map<std::string, std::pair<double, double>> rates;
    for (const auto& u : pool) {
        rates[u.z_class].first += u.treated ? 1.0 : 0.0;
        rates[u.z_class].second += 1.0;
    }
    for (const auto& [z, rate] : rates)
        REQUIRE(model.predict(z) == Catch::Approx(rate.first / rate.second).margin(1e-4));
}

TEST_CASE("logistic regression on independent labels has near-zero weights") {
    const auto pool = synthetic_pool(
        10000, {{"a", 0.5}, {"b", 0.5}, {"c", 0.5}},
        {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}}, 0.0, 1.0, 317);
    const PropensityModel model = fit_logistic(pool);
    // one-hot weights are identified only up to a shared shift; compare gaps
    for (Eigen::Index i = 1; i < model.weights.size(); ++i)
        for (Eigen::Index j = 1; j < model.weights.size(); ++j)
            REQUIRE(std::fabs(model.weights(i) - model.weights(j)) < 0.05);
}

TEST_CASE("logistic gradient matches central finite differences") {
    RngStream stream(331);
    Eigen::MatrixXd X(60, 3);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = stream.uniform(-2, 2);
        X(i, 2) = stream.uniform(-2, 2);
        y(i) = stream.uniform01() < 0.5 ? 1.0 : 0.0;
    }
    Eigen::VectorXd beta(3);
    beta << 0.3, -0.7, 1.1;
    const auto [ll, grad] = logistic_loglik_grad(X, y, beta);
    (void)ll;
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd up = beta, dn = beta;
        up(k) += h;
        dn(k) -= h;
        const double numeric =
            (logistic_loglik_grad(X, y, up).first - logistic_loglik_grad(X, y, dn).first) /
            (2.0 * h);
        REQUIRE(grad(k) == Catch::Approx(numeric).epsilon(1e-6).margin(1e-6));
    }
}

TEST_CASE("logistic fit rejects single-class labels") {
    auto pool = synthetic_pool(50, {{"a", 1.1}}, {{"a", 0.0}}, 0.0, 1.0, 337);
    for (auto& u : pool) u.treated = true;
    REQUIRE_THROWS_AS(fit_logistic(pool), Error);
}

TEST_CASE("matching basics") {
    std::vector<CausalUnit> treated, control;
    for (std::size_t i = 0; i < 5; ++i) {
        CausalUnit u;
        u.window_id = unit_id(i);
        u.propensity = 0.5;
        u.treated = true;
        treated.push_back(u);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        CausalUnit u;
        u.window_id = unit_id(100 + i);
        u.propensity = 0.5;
        control.push_back(u);
    }
    const MatchResult r = match_pairs(treated, control);
    REQUIRE(r.pairs.size() == 3);  // min(|treated|, |control|)
    REQUIRE(r.dropped_treated == 2);
    // all-equal propensities pair in window_id order
    REQUIRE(treated[r.pairs[0].first].window_id == unit_id(0));
    REQUIRE(control[r.pairs[0].second].window_id == unit_id(100));
    REQUIRE_THROWS_AS(match_pairs(treated, {}), Error);
}

TEST_CASE("matched controls mirror the treated class distribution") {
    const auto pool = synthetic_pool(
        8000, {{"a", 1.0 / 3.0}, {"b", 1.0 / 6.0}, {"c", 1.0 / 6.0}},
        {{"a", 10.0}, {"b", 0.0}, {"c", 0.0}}, 3.0, 1.0, 347);
    const PropensityModel model = fit_logistic(pool);
    std::vector<CausalUnit> treated, control;
    for (auto u : pool) {
        u.propensity = model.predict(u.z_class);
        (u.treated ? treated : control).push_back(u);
    }
    const MatchResult r = match_pairs(treated, control);
    std::vector<CausalUnit> matched_controls;
    for (const auto& [t, c] : r.pairs) matched_controls.push_back(control[c]);
    const auto treated_dist = class_distribution(treated);
    const double tv_matched =
        total_variation(class_distribution(matched_controls), treated_dist);
    const double tv_pool = total_variation(class_distribution(control), treated_dist);
    REQUIRE(tv_matched < tv_pool);
    REQUIRE(tv_matched < 0.02);
}

TEST_CASE("ape and pie") {
    REQUIRE(ape({1, 2, 3}, {1, 2, 3}) == 0.0);
    REQUIRE(ape({5, 5}, {2, 2, 2}) == 3.0);
    REQUIRE_THROWS_AS(ape({}, {1.0}), Error);

    RngStream stream(349);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> a(1 + stream.uniform_index(50)), b(1 + stream.uniform_index(50));
        for (auto& v : a) v = stream.uniform(-10, 10);
        for (auto& v : b) v = stream.uniform(-10, 10);
        long double ma = 0, mb = 0;
        for (double v : a) ma += v;
        for (double v : b) mb += v;
        const double expect =
            std::fabs(static_cast<double>(ma / a.size() - mb / b.size()));
        REQUIRE(ape(a, b) == Catch::Approx(expect).margin(1e-12));
    }

    REQUIRE(pie_percent(4.0, 4.0) == 0.0);
    REQUIRE(pie_percent(6.30, 0.0) == Catch::Approx(630.0));
    REQUIRE(pie_percent(2.0, 5.5) == pie_percent(5.5, 2.0));
}

TEST_CASE("analyze aggregates the max over distributions") {
    const auto pool = synthetic_pool(
        6000, {{"a", 1.0 / 3.0}, {"b", 1.0 / 6.0}, {"c", 1.0 / 6.0}},
        {{"a", 10.0}, {"b", 0.0}, {"c", 0.0}}, 3.0, 1.0, 353);
    std::vector<DistributionSpec> specs;
    for (int i = 0; i < 3; ++i) {
        DistributionSpec spec;
        spec.tag = "DC" + std::to_string(i + 1);
        spec.favored_value = std::string(1, static_cast<char>('a' + i));
        spec.sample_size = 4000;
        spec.seed = 400 + static_cast<std::uint64_t>(i);
        specs.push_back(spec);
    }
    // one broken spec is skipped with a warning
    DistributionSpec broken;
    broken.tag = "DC4";
    broken.favored_value = "nope";
    broken.sample_size = 10;
    specs.push_back(broken);

    const CausalAnalysis analysis = analyze(pool, "S_x", PerturbationId::P1, specs);
    REQUIRE(analysis.valid);
    REQUIRE(analysis.per_spec.size() == 3);
    REQUIRE(analysis.warnings.size() == 1);
    double max_pie = 0.0, max_ape = 0.0;
    for (const auto& r : analysis.per_spec) {
        max_pie = std::max(max_pie, r.pie);
        max_ape = std::max(max_ape, r.ape_m);
        REQUIRE(r.ape_o >= 0.0);
        REQUIRE(r.ape_m >= 0.0);
        REQUIRE(r.pie >= 0.0);
    }
    REQUIRE(analysis.max_pie == max_pie);
    REQUIRE(analysis.max_ape_m == max_ape);
}
