// SPDX-License-Identifier: MIT

#include "fellerlab/brw_core.hpp"

#include "fellerlab/numeric.hpp"
#include "fellerlab/parallel.hpp"
#include "fellerlab/rng.hpp"
#include "fellerlab/text_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace fellerlab {

JumpingMeasure::JumpingMeasure(double kill, std::vector<double> probs) : kill_(kill), probs_(std::move(probs)) {
    if (!(kill_ >= 0.0) || !std::isfinite(kill_))
        throw Error(ErrorCode::InvalidArgument, "kill probability must be finite and >= 0");
    for (double p : probs_)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw Error(ErrorCode::InvalidArgument, "jump probabilities must be finite and >= 0");
    while (!probs_.empty() && probs_.back() == 0.0) probs_.pop_back();
    if (probs_.empty()) probs_.push_back(0.0);

    CompensatedSum total;
    CompensatedSum leaving;
    total.add(kill_);
    leaving.add(kill_);
    for (std::size_t j = 0; j < probs_.size(); ++j) {
        total.add(probs_[j]);
        if (j > 0) leaving.add(probs_[j]);
    }
    if (std::abs(total.value() - 1.0) > kMassTolerance)
        throw Error(ErrorCode::InvalidArgument,
                    "jumping measure mass is " + text::format_double(total.value()) + ", expected 1");
    departure_mass_ = leaving.value();
}

double JumpingMeasure::prob(std::int64_t j) const noexcept {
    if (j < 0 || j >= static_cast<std::int64_t>(probs_.size())) return 0.0;
    return probs_[static_cast<std::size_t>(j)];
}

JumpingMeasure JumpingMeasure::from_spec(std::string_view spec) {
    std::optional<double> kill;
    std::map<std::int64_t, double> entries;
    for (auto item : text::split(spec, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw Error(ErrorCode::Parse, "measure entries are index:probability");
        const auto key = text::trim(item.substr(0, colon));
        const double p = text::parse_double(item.substr(colon + 1));
        if (key == "kill" || key == "D" || key == "delta") {
            if (kill) throw Error(ErrorCode::Parse, "kill mass given twice");
            kill = p;
        } else {
            const auto j = text::parse_int(key);
            if (j < 0) throw Error(ErrorCode::Parse, "negative measure index");
            if (!entries.emplace(j, p).second) throw Error(ErrorCode::Parse, "index given twice");
        }
    }
    std::vector<double> probs(entries.empty() ? 1 : static_cast<std::size_t>(entries.rbegin()->first + 1), 0.0);
    CompensatedSum sum;
    for (auto [j, p] : entries) {
        probs[static_cast<std::size_t>(j)] = p;
        sum.add(p);
    }
    double k = kill.value_or(1.0 - sum.value());
    if (!kill && k < 0.0 && k > -kMassTolerance) k = 0.0;
    return JumpingMeasure(k, std::move(probs));
}

JumpingMeasure JumpingMeasure::parse(std::string_view text_in) {
    std::optional<double> kill;
    std::map<std::int64_t, double> entries;
    std::size_t start = 0;
    while (start <= text_in.size()) {
        const auto nl = text_in.find('\n', start);
        auto line = text::trim(text_in.substr(start, nl == std::string_view::npos ? nl : nl - start));
        if (!line.empty() && line.front() != '#') {
            const auto comma = line.find(',');
            if (comma == std::string_view::npos) throw Error(ErrorCode::Parse, "measure rows are index,probability");
            const auto key = text::trim(line.substr(0, comma));
            const double p = text::parse_double(line.substr(comma + 1));
            if (key == "kill") {
                if (kill) throw Error(ErrorCode::Parse, "duplicate kill row");
                kill = p;
            } else if (!entries.emplace(text::parse_int(key), p).second || entries.begin()->first < 0) {
                throw Error(ErrorCode::Parse, "duplicate or negative index row");
            }
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (!kill) throw Error(ErrorCode::Parse, "measure file has no kill row");
    std::vector<double> probs(entries.empty() ? 1 : static_cast<std::size_t>(entries.rbegin()->first + 1), 0.0);
    for (auto [j, p] : entries) probs[static_cast<std::size_t>(j)] = p;
    return JumpingMeasure(*kill, std::move(probs));
}

std::string JumpingMeasure::format() const {
    std::string out = "kill," + text::format_double(kill_) + "\n";
    for (std::size_t j = 0; j < probs_.size(); ++j)
        if (probs_[j] > 0.0) out += std::to_string(j) + "," + text::format_double(probs_[j]) + "\n";
    return out;
}

std::vector<Transition> step_law(const JumpingMeasure& measure, State state) {
    if (state < 0) throw Error(ErrorCode::InvalidArgument, "step_law requires a state >= 0");
    if (state >= 1) return {{state - 1, 0.5}, {state + 1, 0.5}};
    std::vector<Transition> law;
    if (measure.kill() > 0.0) law.push_back({kCemetery, measure.kill()});
    for (std::int64_t j = 0; j <= measure.max_index(); ++j)
        if (measure.prob(j) > 0.0) law.push_back({j, measure.prob(j)});
    return law;
}

namespace {

/// Departure sampling at 0: geometric holding time, then a draw conditional on leaving.
class BoundarySampler {
public:
    explicit BoundarySampler(const JumpingMeasure& m) : leave_(m.departure_mass()) {
        always_stay_ = !(leave_ > 0.0);
        never_stay_ = m.prob(0) == 0.0;
        if (!always_stay_ && !never_stay_) log_stay_ = std::log1p(-std::min(leave_, 1.0));
        CompensatedSum cum;
        for (std::int64_t j = 1; j <= m.max_index(); ++j) {
            if (m.prob(j) > 0.0) {
                cum.add(m.prob(j));
                outcomes_.push_back(j);
                cumulative_.push_back(cum.value());
            }
        }
        if (m.kill() > 0.0) {
            cum.add(m.kill());
            outcomes_.push_back(kCemetery);
            cumulative_.push_back(cum.value());
        }
    }

    /// Number of consecutive 0 -> 0 transitions before the next departure.
    std::int64_t stays(PathRng& rng) const noexcept {
        if (always_stay_) return std::numeric_limits<std::int64_t>::max();
        if (never_stay_) return 0;
        const double s = std::floor(std::log(rng.uniform_open0()) / log_stay_);
        if (!(s < 4e18)) return std::numeric_limits<std::int64_t>::max();
        return static_cast<std::int64_t>(s);
    }

    State departure(PathRng& rng) const noexcept {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return outcomes_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

private:
    double leave_;
    bool always_stay_ = false;
    bool never_stay_ = false;
    double log_stay_ = 0.0;
    std::vector<State> outcomes_;
    std::vector<double> cumulative_;
};

struct NullRecorder {
    void push(State) noexcept {}
    void zeros(std::int64_t) noexcept {}
    void bits(State, std::uint64_t) noexcept {}
};

struct PathRecorder {
    BRWPath* path;
    void push(State s) { path->states.push_back(s); }
    void zeros(std::int64_t n) { path->states.insert(path->states.end(), static_cast<std::size_t>(n), State{0}); }
    void bits(State x, std::uint64_t w) {
        for (int b = 0; b < 64; ++b) {
            x += ((w >> b) & 1U) ? 1 : -1;
            path->states.push_back(x);
        }
    }
};

constexpr State kChunk = 64;

template <class Recorder>
PathSummary run_path(const BoundarySampler& boundary, State start, PathRng& rng, const SummaryOptions& options,
                     Recorder& rec) {
    PathSummary out;
    out.snapshots.reserve(options.checkpoints.size());
    State x = start;
    std::int64_t k = 0;
    std::int64_t visits = 0;
    std::uint64_t word = 0;
    int bits_left = 0;
    rec.push(x);
    for (const std::int64_t horizon : options.checkpoints) {
        while (k < horizon && x != kCemetery) {
            if (x == 0) {
                const std::int64_t stays = boundary.stays(rng);
                const std::int64_t room = horizon - k;
                if (stays >= room) {
                    // Holding times are memoryless, so the next segment redraws.
                    visits += room;
                    rec.zeros(room);
                    k = horizon;
                    break;
                }
                visits += stays + 1;
                rec.zeros(stays);
                k += stays + 1;
                const State to = boundary.departure(rng);
                ++out.departures;
                if (to >= options.window_lo && to <= options.window_hi) ++out.window_departures;
                if (to == kCemetery) {
                    out.killed_at = k;
                    x = kCemetery;
                    break;
                }
                x = to;
                rec.push(x);
            } else if (x >= kChunk && horizon - k >= kChunk) {
                // From x >= 64 the next 64 steps cannot visit 0 before the last one.
                const std::uint64_t w = rng.next();
                rec.bits(x, w);
                x += 2 * static_cast<State>(std::popcount(w)) - kChunk;
                k += kChunk;
            } else {
                if (bits_left == 0) {
                    word = rng.next();
                    bits_left = 64;
                }
                x += (word & 1U) ? 1 : -1;
                word >>= 1;
                --bits_left;
                ++k;
                rec.push(x);
            }
        }
        out.snapshots.push_back({x, visits});
    }
    return out;
}

void check_options(State start, const SummaryOptions& options) {
    if (start < 0) throw Error(ErrorCode::InvalidArgument, "start state must be >= 0");
    if (options.checkpoints.empty()) throw Error(ErrorCode::InvalidArgument, "at least one checkpoint is required");
    std::int64_t prev = 0;
    for (auto c : options.checkpoints) {
        if (c < prev) throw Error(ErrorCode::InvalidArgument, "checkpoints must be ascending and >= 0");
        prev = c;
    }
}

}  // namespace

PathSummary simulate_one(const JumpingMeasure& measure, State start, std::uint64_t seed, std::uint64_t index,
                         const SummaryOptions& options, BRWPath* record) {
    check_options(start, options);
    const BoundarySampler boundary(measure);
    PathRng rng(seed, index);
    if (record) {
        *record = BRWPath{start, {}, std::nullopt};
        PathRecorder rec{record};
        auto summary = run_path(boundary, start, rng, options, rec);
        record->killed_at = summary.killed_at;
        return summary;
    }
    NullRecorder rec;
    return run_path(boundary, start, rng, options, rec);
}

PathEnsemble simulate(const JumpingMeasure& measure, State start, std::int64_t steps, std::int64_t count,
                      std::uint64_t seed) {
    if (steps < 0) throw Error(ErrorCode::InvalidArgument, "steps must be >= 0");
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
    SummaryOptions options;
    options.checkpoints = {steps};
    check_options(start, options);
    const BoundarySampler boundary(measure);
    PathEnsemble ensemble;
    ensemble.seed = seed;
    ensemble.steps = steps;
    ensemble.measure = std::make_shared<const JumpingMeasure>(measure);
    ensemble.paths.resize(static_cast<std::size_t>(count));
    parallel_for(count, [&](std::int64_t i) {
        auto& path = ensemble.paths[static_cast<std::size_t>(i)];
        path.start = start;
        path.states.reserve(static_cast<std::size_t>(std::min<std::int64_t>(steps + 1, 1 << 20)));
        PathRng rng(seed, static_cast<std::uint64_t>(i));
        PathRecorder rec{&path};
        path.killed_at = run_path(boundary, start, rng, options, rec).killed_at;
    });
    return ensemble;
}

std::vector<PathSummary> simulate_summaries(const JumpingMeasure& measure, State start, std::int64_t count,
                                            std::uint64_t seed, const SummaryOptions& options) {
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
    check_options(start, options);
    const BoundarySampler boundary(measure);
    std::vector<PathSummary> out(static_cast<std::size_t>(count));
    parallel_for(count, [&](std::int64_t i) {
        PathRng rng(seed, static_cast<std::uint64_t>(i));
        NullRecorder rec;
        out[static_cast<std::size_t>(i)] = run_path(boundary, start, rng, options, rec);
    });
    return out;
}

MeanEstimate occupation_count(const PathEnsemble& ensemble, std::int64_t m) {
    if (m < 0 || m > ensemble.steps) throw Error(ErrorCode::InvalidArgument, "occupation horizon exceeds ensemble steps");
    if (ensemble.paths.empty()) throw Error(ErrorCode::InvalidArgument, "empty ensemble");
    CompensatedSum sum;
    CompensatedSum sum_sq;
    for (const auto& path : ensemble.paths) {
        const auto limit = std::min<std::int64_t>(m, static_cast<std::int64_t>(path.states.size()));
        const auto visits = static_cast<double>(
            std::count(path.states.begin(), path.states.begin() + limit, State{0}));
        sum.add(visits);
        sum_sq.add(visits * visits);
    }
    const double n = static_cast<double>(ensemble.paths.size());
    const double mean = sum.value() / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, 1.96 * std::sqrt(var / n)};
}

namespace {

std::int64_t count_first_passages(std::int64_t x, std::int64_t remaining) {
    if (x == 0) return remaining == 0 ? 1 : 0;
    if (remaining == 0) return 0;
    return count_first_passages(x - 1, remaining - 1) + count_first_passages(x + 1, remaining - 1);
}

}  // namespace

double first_passage_time(std::int64_t i, std::int64_t j) {
    if (i < 1) throw Error(ErrorCode::InvalidArgument, "first_passage_time requires i >= 1");
    if (j < 0) throw Error(ErrorCode::InvalidArgument, "first_passage_time requires j >= 0");
    if (j > 24) throw Error(ErrorCode::BudgetExceeded, "first_passage_time enumeration budget is j <= 24");
    return std::ldexp(static_cast<double>(count_first_passages(i, j)), -static_cast<int>(j));
}

namespace {

class LeafCounter {
public:
    LeafCounter(const JumpingMeasure& m, State start, int depth)
        : measure_(m), depth_(depth), width_(start + 1 + static_cast<State>(depth) * std::max<State>(m.max_index(), 1)) {
        memo_.assign(static_cast<std::size_t>((width_ + 1) * (depth + 1)), -1);
    }

    std::int64_t count(State x, int remaining) {
        if (remaining == 0 || x == kCemetery) return 1;
        auto& slot = memo_[static_cast<std::size_t>(x * (depth_ + 1) + remaining)];
        if (slot >= 0) return slot;
        std::int64_t total = 0;
        auto add = [&total](std::int64_t v) { total = std::min(total + v, kEnumerationLeafBudget + 1); };
        if (x >= 1) {
            add(count(x - 1, remaining - 1));
            add(count(x + 1, remaining - 1));
        } else {
            if (measure_.kill() > 0.0) add(1);
            for (State j = 0; j <= measure_.max_index(); ++j)
                if (measure_.prob(j) > 0.0) add(count(j, remaining - 1));
        }
        slot = total;
        return total;
    }

private:
    const JumpingMeasure& measure_;
    int depth_;
    State width_;
    std::vector<std::int64_t> memo_;
};

void check_enumeration(State start, int depth) {
    if (start < 0) throw Error(ErrorCode::InvalidArgument, "start state must be >= 0");
    if (depth < 0) throw Error(ErrorCode::InvalidArgument, "depth must be >= 0");
    if (depth > kEnumerationMaxDepth)
        throw Error(ErrorCode::BudgetExceeded, "enumeration depth is limited to " + std::to_string(kEnumerationMaxDepth));
}

}  // namespace

std::int64_t enumeration_leaves(const JumpingMeasure& measure, State start, int depth) {
    check_enumeration(start, depth);
    LeafCounter counter(measure, start, depth);
    return counter.count(start, depth);
}

double enumerate_exact(const JumpingMeasure& measure, State start, int depth, const PathFunctional& functional) {
    if (enumeration_leaves(measure, start, depth) > kEnumerationLeafBudget)
        throw Error(ErrorCode::BudgetExceeded, "path tree exceeds " + std::to_string(kEnumerationLeafBudget) + " leaves");

    std::vector<std::pair<State, double>> boundary_moves;
    if (measure.kill() > 0.0) boundary_moves.emplace_back(kCemetery, measure.kill());
    for (State j = 0; j <= measure.max_index(); ++j)
        if (measure.prob(j) > 0.0) boundary_moves.emplace_back(j, measure.prob(j));

    std::vector<State> path(static_cast<std::size_t>(depth) + 1, kCemetery);
    CompensatedSum acc;
    auto expand = [&](auto&& self, State x, int level, double weight) -> void {
        path[static_cast<std::size_t>(level)] = x;
        if (level == depth || x == kCemetery) {
            std::fill(path.begin() + level + 1, path.end(), kCemetery);
            acc.add(weight * functional(path));
            return;
        }
        if (x >= 1) {
            self(self, x - 1, level + 1, weight * 0.5);
            self(self, x + 1, level + 1, weight * 0.5);
        } else {
            for (const auto& [to, p] : boundary_moves) self(self, to, level + 1, weight * p);
        }
    };
    expand(expand, start, 0, 1.0);
    return acc.value();
}

std::string ensemble_summary_csv(const PathEnsemble& ensemble) {
    std::ostringstream ss;
    ss << "path_id,final_state,killed_at,visits_to_zero\n";
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const auto& p = ensemble.paths[i];
        const auto visits = std::count(p.states.begin(),
                                       p.states.begin() + std::min<std::int64_t>(ensemble.steps,
                                                                                 static_cast<std::int64_t>(p.states.size())),
                                       State{0});
        ss << i << ',';
        if (p.killed_at)
            ss << "D," << *p.killed_at;
        else
            ss << p.states.back() << ',';
        ss << ',' << visits << '\n';
    }
    return ss.str();
}

std::string ensemble_paths_csv(const PathEnsemble& ensemble) {
    std::ostringstream ss;
    ss << "path_id,step,state\n";
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const auto& p = ensemble.paths[i];
        for (std::size_t k = 0; k < p.states.size(); ++k) ss << i << ',' << k << ',' << p.states[k] << '\n';
        if (p.killed_at) ss << i << ',' << *p.killed_at << ",D\n";
    }
    return ss.str();
}

}  // namespace fellerlab
