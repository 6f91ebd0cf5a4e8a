#include "cv.hpp"
#include "error.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace recoverbench;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ok;
}

std::vector<Label> labels_ab(std::size_t n_a, std::size_t n_b) {
    std::vector<Label> l(n_a, Label::A);
    l.insert(l.end(), n_b, Label::B);
    return l;
}

EpochDataset gaussian(std::uint64_t seed, std::size_t n_a, std::size_t n_b, double shift, std::size_t n_time = 12) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    return fixture::make_dataset(n_a, n_b, 3, n_time, [&](auto i, auto c, auto) {
        return g(rng) + (i < n_a && c == 0 ? shift : 0.0);
    });
}

CvOptions small_options(Method m = Method::svm) {
    CvOptions o;
    o.method = m;
    o.c_grid = {0.1, 1.0};
    o.window = {0.0, 11.0};
    return o;
}

} // namespace

TEST_CASE("make_folds: stratified partition") {
    const auto labels = labels_ab(60, 56);
    const auto plan = make_folds(labels, 10, 5, 3);
    REQUIRE(plan.outer.size() == 10);
    std::multiset<std::size_t> seen;
    for (std::size_t f = 0; f < 10; ++f) {
        const auto& fold = plan.outer[f];
        const auto a = std::count_if(fold.begin(), fold.end(), [&](auto t) { return labels[t] == Label::A; });
        const auto b = static_cast<std::ptrdiff_t>(fold.size()) - a;
        CHECK(a == 6);
        CHECK(b >= 5);
        CHECK(b <= 6);
        seen.insert(fold.begin(), fold.end());

        const auto train = plan.outer_train(f);
        CHECK(train.size() + fold.size() == labels.size());
        REQUIRE(plan.inner[f].size() == 5);
        std::multiset<std::size_t> inner_seen;
        for (const auto& sub : plan.inner[f]) inner_seen.insert(sub.begin(), sub.end());
        CHECK(std::vector<std::size_t>(inner_seen.begin(), inner_seen.end()) == train);
        for (std::size_t g = 0; g < 5; ++g)
            CHECK(plan.inner_train(f, g).size() + plan.inner[f][g].size() == train.size());
    }
    CHECK(seen.size() == labels.size());
    CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == labels.size());
}

TEST_CASE("make_folds: seeded and sensitive to the seed") {
    const auto labels = labels_ab(20, 20);
    const auto a = make_folds(labels, 5, 3, 11);
    const auto b = make_folds(labels, 5, 3, 11);
    const auto c = make_folds(labels, 5, 3, 12);
    CHECK(a.outer == b.outer);
    CHECK(a.inner == b.inner);
    CHECK(a.outer != c.outer);
}

TEST_CASE("make_folds: too few trials per class") {
    CHECK(code_of([] { make_folds(labels_ab(9, 30), 10, 5, 1); }) == ErrorCode::validation);
    // 9 A training trials per outer fold cannot fill 10 inner folds.
    CHECK(code_of([] { make_folds(labels_ab(10, 10), 10, 10, 1); }) == ErrorCode::validation);
    CHECK(code_of([] { make_folds(labels_ab(10, 10), 1, 5, 1); }) == ErrorCode::validation);
}

TEST_CASE("balanced_accuracy: examples") {
    using L = Label;
    CHECK(balanced_accuracy(std::vector<L>{L::A, L::A, L::B, L::B}, std::vector<L>{L::A, L::A, L::B, L::B}) == 1.0);
    CHECK(balanced_accuracy(std::vector<L>{L::A, L::A, L::A, L::A}, std::vector<L>{L::A, L::A, L::B, L::B}) == 0.5);
    // Class A: 2/3 correct, class B: 2/3 correct.
    const std::vector<L> truth{L::A, L::A, L::A, L::B, L::B, L::B};
    const std::vector<L> pred{L::A, L::A, L::B, L::B, L::B, L::A};
    CHECK(balanced_accuracy(pred, truth) == doctest::Approx(2.0 / 3.0));
    CHECK(code_of([] {
              balanced_accuracy(std::vector<L>{L::A}, std::vector<L>{L::A});
          }) == ErrorCode::validation);
    CHECK(balanced_accuracy(std::vector<L>{L::A, L::B}, std::vector<L>{L::A, L::A}, true) == 0.5);
}

TEST_CASE("fold_balanced_accuracy: averages per-fold values") {
    using L = Label;
    const std::vector<L> truth{L::A, L::B, L::A, L::B};
    const std::vector<L> pred{L::A, L::B, L::B, L::B};
    const std::vector<std::vector<std::size_t>> folds{{0, 1}, {2, 3}};
    CHECK(fold_balanced_accuracy(pred, truth, folds) == 0.75);
}

TEST_CASE("run_cv: separable data is classified perfectly") {
    const auto d = gaussian(1, 20, 20, 6.0);
    const auto plan = make_folds(d.labels, 5, 3, 4);
    for (Method m : {Method::svm, Method::mkl}) {
        const auto r = run_cv(d, plan, small_options(m));
        CHECK(r.balanced_accuracy == 1.0);
        CHECK(r.folds.size() == 5);
        for (const auto& f : r.folds) {
            CHECK(f.primal_dual_max_diff <= 1e-8);
            CHECK(f.model.channel_contributions.size() == 3);
            CHECK((f.chosen_c == 0.1 || f.chosen_c == 1.0));
        }
        for (std::size_t i = 0; i < d.n_trials; ++i) CHECK(r.predictions[i] == d.labels[i]);
    }
}

TEST_CASE("run_cv: shuffled labels stay near chance") {
    // 60 A + 56 B trials with a strong class effect and, as with real epochs,
    // more features than trials; shuffling the labels removes the effect.
    int inside = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        auto d = gaussian(100 + s, 60, 56, 3.0, 80);
        std::mt19937_64 rng(500 + s);
        std::shuffle(d.labels.begin(), d.labels.end(), rng);
        const auto plan = make_folds(d.labels, 10, 5, s);
        CvOptions opt;
        opt.window = {0.0, 79.0};
        opt.compute_maps = false;
        const auto r = run_cv(d, plan, opt);
        inside += r.balanced_accuracy >= 0.35 && r.balanced_accuracy <= 0.65;
    }
    CHECK(inside >= 18);
}

TEST_CASE("model_permutation_test: floor on separable data; empty when disabled") {
    const auto d = gaussian(2, 20, 20, 6.0);
    auto opt = small_options();
    opt.c_grid = {1.0};
    const auto plan = make_folds(d.labels, 5, 3, 5);
    const auto raw = build_channel_kernels(d, opt.window);
    const auto r = run_cv(d, raw, plan, opt);
    REQUIRE(r.balanced_accuracy == 1.0);
    const auto p = model_permutation_test(d, raw, plan, opt, r.balanced_accuracy, 500, 7);
    REQUIRE(p.has_value());
    CHECK(*p == 1.0 / 501.0);
    CHECK_FALSE(model_permutation_test(d, raw, plan, opt, r.balanced_accuracy, 0, 7).has_value());
}

TEST_CASE("run_cv: outer test trials never influence their fold's model") {
    const auto d = gaussian(3, 15, 15, 1.0);
    const auto plan = make_folds(d.labels, 5, 3, 6);
    auto mutated = d;
    for (auto t : plan.outer[0])
        for (std::size_t c = 0; c < d.n_channels; ++c)
            for (auto& v : mutated.trace(t, c)) v = v * 50.0 + 13.0;
    for (Method m : {Method::svm, Method::mkl}) {
        const auto a = run_cv(d, plan, small_options(m));
        const auto b = run_cv(mutated, plan, small_options(m));
        const auto &fa = a.folds[0], &fb = b.folds[0];
        CHECK(fa.inner_scores == fb.inner_scores);
        CHECK(fa.chosen_c == fb.chosen_c);
        CHECK(fa.model.alphas == fb.model.alphas);
        CHECK(fa.model.bias == fb.model.bias);
        CHECK(fa.model.kernel_weights == fb.model.kernel_weights);
        CHECK(fa.model.kernel_scales == fb.model.kernel_scales);
        CHECK(fa.model.weight_map == fb.model.weight_map);
    }
}

TEST_CASE("run_cv: invalid C grid") {
    const auto d = gaussian(4, 10, 10, 1.0);
    const auto plan = make_folds(d.labels, 2, 2, 1);
    auto opt = small_options();
    opt.c_grid = {};
    CHECK(code_of([&] { run_cv(d, plan, opt); }) == ErrorCode::validation);
    opt.c_grid = {-1.0};
    CHECK(code_of([&] { run_cv(d, plan, opt); }) == ErrorCode::validation);
}
