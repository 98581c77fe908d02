// SPDX-License-Identifier: MIT
#include "fellerlab/brw_core.hpp"
#include "fellerlab/genfun.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fellerlab;

namespace {

oracle::Law to_law(const JumpingMeasure& m) {
    return {m.kill(), std::vector<double>(m.probs().begin(), m.probs().end())};
}

std::vector<long> as_longs(std::span<const State> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_CASE("JumpingMeasure construction and text forms") {
    const auto m = JumpingMeasure::from_spec("0:0.5, 3:0.25");
    CHECK(m.kill() == 0.25);
    CHECK(m.prob(0) == 0.5);
    CHECK(m.prob(3) == 0.25);
    CHECK(m.prob(7) == 0.0);
    CHECK(m.max_index() == 3);
    CHECK(m.departure_mass() == 0.5);

    const auto round = JumpingMeasure::parse(m.format());
    CHECK(round.kill() == m.kill());
    CHECK(round.max_index() == m.max_index());
    for (std::int64_t j = 0; j <= m.max_index(); ++j) CHECK(round.prob(j) == m.prob(j));

    CHECK(JumpingMeasure::from_spec("kill:1").kill() == 1.0);
    CHECK(error_code_of([] { (void)JumpingMeasure(0.5, {0.6}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { (void)JumpingMeasure(-0.1, {1.1}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { (void)JumpingMeasure::from_spec("0:0.5,0:0.5"); }) == ErrorCode::Parse);
    CHECK(error_code_of([] { (void)JumpingMeasure::parse("0,1.0\n"); }) == ErrorCode::Parse);
}

TEST_CASE("step_law") {
    const auto m = JumpingMeasure(0.1, {0.0, 0.9});
    const auto interior = step_law(m, 3);
    REQUIRE(interior.size() == 2);
    CHECK(interior[0].to == 2);
    CHECK(interior[0].probability == 0.5);
    CHECK(interior[1].to == 4);
    CHECK(interior[1].probability == 0.5);

    const auto boundary = step_law(m, 0);
    REQUIRE(boundary.size() == 2);
    CHECK(is_cemetery(boundary[0].to));
    CHECK(boundary[0].probability == 0.1);
    CHECK(boundary[1].to == 1);
    CHECK(boundary[1].probability == 0.9);

    const auto hold = step_law(JumpingMeasure(0.0, {1.0}), 0);
    REQUIRE(hold.size() == 1);
    CHECK(hold[0].to == 0);
    CHECK(hold[0].probability == 1.0);
}

TEST_CASE("simulate: trivial boundary laws") {
    const auto killed = simulate(JumpingMeasure(1.0, {}), 0, 50, 20, 1);
    for (const auto& p : killed.paths) {
        CHECK(p.killed_at == std::optional<std::int64_t>(1));
        CHECK(p.states == std::vector<State>{0});
    }
    const auto held = simulate(JumpingMeasure(0.0, {1.0}), 0, 50, 20, 1);
    for (const auto& p : held.paths) {
        CHECK_FALSE(p.killed_at);
        CHECK(p.states == std::vector<State>(51, 0));
    }
}

TEST_CASE("simulate: paths are simple-walk paths and reproducible") {
    const auto m = JumpingMeasure::from_spec("0:0.3,1:0.2,5:0.3,kill:0.2");
    const auto a = simulate(m, 2, 300, 200, 99);
    const auto b = simulate(m, 2, 300, 200, 99);
    for (std::size_t k = 0; k < a.paths.size(); ++k) {
        const auto& p = a.paths[k];
        CHECK(p.states == b.paths[k].states);
        CHECK(p.killed_at == b.paths[k].killed_at);
        CHECK(p.states.front() == 2);
        for (std::size_t s = 1; s < p.states.size(); ++s) {
            const auto from = p.states[s - 1];
            const auto to = p.states[s];
            if (from > 0) CHECK(std::abs(to - from) == 1);
            else CHECK((to == 0 || to == 1 || to == 5));
        }
        if (p.killed_at) {
            CHECK(*p.killed_at == static_cast<std::int64_t>(p.states.size()));
            CHECK(p.states.back() == 0);
        } else {
            CHECK(p.states.size() == 301);
        }
    }
    const auto other = simulate(m, 2, 300, 200, 100);
    int differ = 0;
    for (std::size_t k = 0; k < a.paths.size(); ++k) differ += a.paths[k].states != other.paths[k].states;
    CHECK(differ > 150);
}

TEST_CASE("simulate: up-steps are fair") {
    const auto e = simulate(JumpingMeasure(0.0, {0.0, 1.0}), 1000, 1'000'000, 1, 3);
    std::int64_t up = 0, interior = 0;
    const auto& s = e.paths[0].states;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k - 1] == 0) continue;
        ++interior;
        up += s[k] > s[k - 1];
    }
    const double frac = static_cast<double>(up) / static_cast<double>(interior);
    CHECK(std::abs(frac - 0.5) <= 3.0 * 0.5 / std::sqrt(static_cast<double>(interior)));
}

TEST_CASE("simulate: reflected walk obeys the folded-normal CLT") {
    const std::int64_t m = 10000, count = 10000;
    SummaryOptions so;
    so.checkpoints = {m};
    const auto out = simulate_summaries(JumpingMeasure(0.0, {0.0, 1.0}), 0, count, 2024, so);
    double sum = 0.0, sq = 0.0;
    for (const auto& s : out) {
        const double v = static_cast<double>(s.snapshots[0].state) / std::sqrt(static_cast<double>(m));
        sum += v;
        sq += v * v;
    }
    const double mean = sum / count;
    const double sd = std::sqrt(sq / count - mean * mean);
    CHECK(std::abs(mean - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * sd / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("streaming summaries agree with recorded paths") {
    const auto m = JumpingMeasure::from_spec("0:0.4,2:0.3,70:0.1,kill:0.2");
    SummaryOptions so;
    so.checkpoints = {0, 7, 64, 65, 200, 500};
    so.window_lo = 60;
    so.window_hi = 80;
    for (std::uint64_t idx = 0; idx < 300; ++idx) {
        BRWPath rec;
        const auto summary = simulate_one(m, 1, 42, idx, so, &rec);
        std::int64_t visits = 0;
        std::size_t c = 0;
        for (std::int64_t k = 0; k <= 500; ++k) {
            const bool alive = k < static_cast<std::int64_t>(rec.states.size());
            const State x = alive ? rec.states[static_cast<std::size_t>(k)] : kCemetery;
            if (c < so.checkpoints.size() && so.checkpoints[c] == k) {
                CHECK(summary.snapshots[c].state == x);
                CHECK(summary.snapshots[c].visits_to_zero == visits);
                ++c;
            }
            if (x == 0) ++visits;
        }
        std::int64_t departures = 0, window = 0;
        for (std::size_t k = 1; k < rec.states.size(); ++k)
            if (rec.states[k - 1] == 0 && rec.states[k] != 0) {
                ++departures;
                window += rec.states[k] >= 60 && rec.states[k] <= 80;
            }
        if (rec.killed_at && *rec.killed_at <= 500) ++departures;
        CHECK(summary.departures == departures);
        CHECK(summary.window_departures == window);
    }
}

TEST_CASE("occupation_count") {
    const auto held = simulate(JumpingMeasure(0.0, {1.0}), 0, 10, 5, 1);
    CHECK(occupation_count(held, 10).mean == 10.0);
    const auto killed = simulate(JumpingMeasure(1.0, {}), 0, 10, 5, 1);
    CHECK(occupation_count(killed, 10).mean == 1.0);
    const auto reflected = simulate(JumpingMeasure(0.0, {0.0, 1.0}), 0, 100, 100000, 8);
    const auto est = occupation_count(reflected, 100);
    CHECK(est.mean <= 19.318);
    CHECK(est.half_width > 0.0);
    CHECK(error_code_of([&] { (void)occupation_count(reflected, 101); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("first_passage_time") {
    CHECK(first_passage_time(1, 1) == 0.5);
    CHECK(first_passage_time(1, 3) == 0.125);
    CHECK(first_passage_time(2, 2) == 0.25);
    CHECK(first_passage_time(2, 3) == 0.0);
    CHECK(first_passage_time(3, 1) == 0.0);
    CHECK(error_code_of([] { (void)first_passage_time(1, 25); }) == ErrorCode::BudgetExceeded);
    for (int i = 1; i <= 4; ++i) {
        double cumulative = 0.0;
        for (int j = 1; j <= 16; ++j) {
            const double p = first_passage_time(i, j);
            CHECK(p == oracle::first_passage_bruteforce(i, j));
            CHECK(p == genfun::catalan_first_passage(i, j));
            CHECK(cumulative + p >= cumulative);
            cumulative += p;
        }
        CHECK(cumulative < 1.0);
    }
}

TEST_CASE("enumerate_exact: small trees") {
    auto at2_is_zero = [](std::span<const State> xs) { return xs[2] == 0 ? 1.0 : 0.0; };
    CHECK(enumerate_exact(JumpingMeasure(0.0, {1.0}), 0, 2, at2_is_zero) == 1.0);
    CHECK(enumerate_exact(JumpingMeasure(0.0, {0.0, 1.0}), 0, 2, at2_is_zero) == 0.5);
    auto x1 = [](std::span<const State> xs) { return static_cast<double>(xs[1]); };
    CHECK(enumerate_exact(JumpingMeasure(0.0, {1.0}), 5, 1, x1) == 5.0);
    CHECK(error_code_of([] {
              (void)enumerate_exact(JumpingMeasure(0.0, {1.0}), 0, 15, [](std::span<const State>) { return 0.0; });
          }) == ErrorCode::BudgetExceeded);
}

TEST_CASE("enumerate_exact agrees with an independent tree oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(4);
        double kill = u(rng);
        double total = kill;
        for (auto& v : w) total += (v = u(rng));
        for (auto& v : w) v /= total;
        kill /= total;
        const JumpingMeasure m(kill, w);
        const auto law = to_law(m);
        const State start = trial % 3;
        const int depth = 6 + trial % 3;
        auto functional = [](std::span<const State> xs) {
            double s = 0.0;
            for (std::size_t k = 0; k < xs.size(); ++k) s += (xs[k] < 0 ? -1.0 : std::sin(1.0 + xs[k])) / (k + 1);
            return s;
        };
        const double exact = enumerate_exact(m, start, depth, functional);
        const double ref = oracle::expect(law, start, depth, [&](const std::vector<long>& xs) {
            std::vector<State> v(xs.begin(), xs.end());
            return functional(v);
        });
        CHECK(std::abs(exact - ref) <= 1e-14);
    }
}

TEST_CASE("Monte Carlo agrees with exact enumeration within 4 standard errors") {
    const auto m = JumpingMeasure::from_spec("0:0.2,1:0.3,3:0.3,kill:0.2");
    const int depth = 10;
    auto functional = [](std::span<const State> xs) {
        double s = 0.0;
        for (const auto x : xs) s += x == 0 ? 1.0 : 0.0;
        return s + (xs.back() < 0 ? 0.0 : std::cos(static_cast<double>(xs.back())));
    };
    const double exact = enumerate_exact(m, 1, depth, functional);
    const auto e = simulate(m, 1, depth, 200000, 5);
    double sum = 0.0, sq = 0.0;
    std::vector<State> xs(depth + 1);
    for (const auto& p : e.paths) {
        for (int k = 0; k <= depth; ++k)
            xs[static_cast<std::size_t>(k)] = k < static_cast<int>(p.states.size()) ? p.states[static_cast<std::size_t>(k)] : kCemetery;
        const double v = functional(xs);
        sum += v;
        sq += v * v;
    }
    const double n = static_cast<double>(e.paths.size());
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - exact) <= 4.0 * se);
}

TEST_CASE("ensemble CSV") {
    const auto e = simulate(JumpingMeasure(1.0, {}), 0, 3, 2, 1);
    CHECK(ensemble_summary_csv(e) == "path_id,final_state,killed_at,visits_to_zero\n0,D,1,1\n1,D,1,1\n");
    const auto held = simulate(JumpingMeasure(0.0, {1.0}), 0, 1, 1, 1);
    CHECK(ensemble_paths_csv(held) == "path_id,step,state\n0,0,0\n0,1,0\n");
}
