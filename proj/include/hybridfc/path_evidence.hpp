#pragma once
// Path evidence channel: enumerate predicate paths (with inverse steps)
// connecting an assertion's subject and object, score each path by its NPMI
// association with the asserted predicate over entity pairs, and fuse the
// strongest paths into a single veracity score ζ by noisy-or.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hybridfc/errors.hpp"
#include "hybridfc/kg.hpp"
#include "hybridfc/rng.hpp"

namespace hybridfc {

struct PathStep {
    TermId predicate;
    Direction dir;
    auto operator<=>(const PathStep&) const = default;
};

struct PredicatePath {
    std::vector<PathStep> steps;
    auto operator<=>(const PredicatePath&) const = default;
};

// Listing-style rendering: inverse steps carry a ^ prefix, steps joined by /.
inline std::string render_path(const PredicatePath& path, const KnowledgeGraph& kg) {
    std::string out;
    for (const PathStep& step : path.steps) {
        if (!out.empty()) out += '/';
        if (step.dir == Direction::Inv) out += '^';
        out += kg.terms().term(step.predicate).lex;
    }
    return out;
}

struct PathScore {
    PredicatePath path;
    double association = 0.0;   // NPMI, clamped to [0,1]
    std::size_t support = 0;    // entity pairs connected by the path
};

struct PathEvidenceOptions {
    int max_length = 3;               // L
    int top_m = 5;                    // paths fused by noisy-or
    std::size_t budget = 1000;        // walk instantiations explored per assertion
    std::size_t min_support = 2;      // frequency pruning threshold
    bool exclude_direct_edge_in_walks = false;  // drop the asserted edge entirely
    std::size_t exact_pair_limit = 1000000;     // |E|² above this → sampling
    std::size_t sample_size = 100000;
    std::uint64_t sample_seed = 17;
};

namespace detail {

// Iterative-deepening DFS over node walks from s, recording the step
// signature of every walk that reaches o. Shorter paths are found before any
// budget is spent on longer ones. Walks may revisit nodes.
class PathEnumerator {
public:
    PathEnumerator(const KnowledgeGraph& kg, TermId s, TermId o, TermId predicate,
                   const PathEvidenceOptions& opt)
        : kg_(kg), s_(s), o_(o), predicate_(predicate), opt_(opt) {}

    std::vector<PredicatePath> run() {
        if (opt_.max_length < 1)
            throw ContractViolation("enumerate_paths: L must be >= 1");
        budget_left_ = opt_.budget;
        for (int len = 1; len <= opt_.max_length && budget_left_ > 0; ++len) {
            target_length_ = len;
            steps_.clear();
            walk(s_, 0);
        }
        std::vector<PredicatePath> out;
        out.reserve(found_.size());
        for (const auto& path : found_) out.push_back(path);
        return out;
    }

private:
    void walk(TermId node, int depth) {
        if (depth == target_length_) {
            if (node == o_) record();
            return;
        }
        for (Direction dir : {Direction::Fwd, Direction::Inv}) {
            for (const Edge& edge : kg_.neighbors(node, dir)) {
                if (budget_left_ == 0) return;
                if (opt_.exclude_direct_edge_in_walks && edge.predicate == predicate_) {
                    bool along = dir == Direction::Fwd && node == s_ && edge.node == o_;
                    bool against = dir == Direction::Inv && node == o_ && edge.node == s_;
                    if (along || against) continue;
                }
                --budget_left_;
                steps_.push_back({edge.predicate, dir});
                walk(edge.node, depth + 1);
                steps_.pop_back();
                if (budget_left_ == 0) return;
            }
        }
    }

    void record() {
        // The asserted predicate as a lone forward step is the claim itself,
        // not evidence for it.
        if (steps_.size() == 1 && steps_[0].predicate == predicate_ &&
            steps_[0].dir == Direction::Fwd)
            return;
        found_.insert(PredicatePath{steps_});
    }

    const KnowledgeGraph& kg_;
    TermId s_, o_, predicate_;
    const PathEvidenceOptions& opt_;
    std::size_t budget_left_ = 0;
    int target_length_ = 1;
    std::vector<PathStep> steps_;
    std::set<PredicatePath> found_;
};

}  // namespace detail

// All deduplicated predicate paths of length ≤ L instantiated by at least one
// concrete walk from s to o, excluding the asserted direct edge.
inline std::vector<PredicatePath> enumerate_paths(const KnowledgeGraph& kg, TermId s,
                                                  TermId o, TermId predicate,
                                                  const PathEvidenceOptions& opt = {}) {
    if (s == kNoTerm || o == kNoTerm) return {};
    detail::PathEnumerator search(kg, s, o, predicate, opt);
    return search.run();
}

// Entities reachable from x along the path's step sequence (sorted, unique).
inline std::vector<TermId> path_targets(const KnowledgeGraph& kg, TermId x,
                                        const PredicatePath& path) {
    std::vector<TermId> frontier{x};
    for (const PathStep& step : path.steps) {
        std::vector<TermId> next;
        for (TermId node : frontier) {
            const std::vector<TermId>& hop = kg.step(node, step.predicate, step.dir);
            next.insert(next.end(), hop.begin(), hop.end());
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return frontier;
}

// Normalized pointwise mutual information between "x→y connected by `path`"
// and "x→y connected by `predicate`" over ordered entity pairs. Exact counting
// when |E|² fits the configured limit, else seeded uniform pair sampling.
// Negative values clamp to 0; the degenerate all-pairs case is 1.
inline PathScore path_association(const KnowledgeGraph& kg, const PredicatePath& path,
                                  TermId predicate,
                                  const PathEvidenceOptions& opt = {}) {
    if (path.steps.empty())
        throw ContractViolation("path_association: empty path");
    const std::vector<TermId>& entities = kg.entities();
    PathScore score;
    score.path = path;
    if (entities.empty()) return score;

    double n_pairs = 0.0;
    double c_path = 0.0, c_pred = 0.0, c_joint = 0.0;
    std::size_t n = entities.size();
    if (n * n <= opt.exact_pair_limit) {
        n_pairs = static_cast<double>(n) * static_cast<double>(n);
        for (TermId x : entities) {
            std::vector<TermId> reach = path_targets(kg, x, path);
            const std::vector<TermId>& direct = kg.step(x, predicate, Direction::Fwd);
            c_path += static_cast<double>(reach.size());
            c_pred += static_cast<double>(direct.size());
            std::vector<TermId> both;
            std::set_intersection(reach.begin(), reach.end(), direct.begin(),
                                  direct.end(), std::back_inserter(both));
            c_joint += static_cast<double>(both.size());
        }
        score.support = static_cast<std::size_t>(c_path);
    } else {
        Rng rng(opt.sample_seed);
        n_pairs = static_cast<double>(opt.sample_size);
        std::map<TermId, std::vector<TermId>> reach_cache;
        for (std::size_t i = 0; i < opt.sample_size; ++i) {
            TermId x = entities[rng.next_below(n)];
            TermId y = entities[rng.next_below(n)];
            auto it = reach_cache.find(x);
            if (it == reach_cache.end())
                it = reach_cache.emplace(x, path_targets(kg, x, path)).first;
            bool on_path = std::binary_search(it->second.begin(), it->second.end(), y);
            const std::vector<TermId>& direct = kg.step(x, predicate, Direction::Fwd);
            bool on_pred = std::binary_search(direct.begin(), direct.end(), y);
            c_path += on_path ? 1.0 : 0.0;
            c_pred += on_pred ? 1.0 : 0.0;
            c_joint += (on_path && on_pred) ? 1.0 : 0.0;
        }
        score.support = static_cast<std::size_t>(c_path);
    }

    if (c_joint == 0.0 || c_path == 0.0 || c_pred == 0.0) return score;
    double p_joint = c_joint / n_pairs;
    double p_path = c_path / n_pairs;
    double p_pred = c_pred / n_pairs;
    if (p_joint >= 1.0) {
        score.association = 1.0;  // joint event covers every pair
        return score;
    }
    double npmi = std::log(p_joint / (p_path * p_pred)) / (-std::log(p_joint));
    score.association = std::clamp(npmi, 0.0, 1.0);
    return score;
}

// 1 − Π(1 − assoc) over associations (noisy-or).
inline double noisy_or(const std::vector<double>& associations) {
    double miss = 1.0;
    for (double a : associations) miss *= 1.0 - a;
    return 1.0 - miss;
}

struct PathVeracity {
    double zeta = 0.0;
    std::vector<PathScore> used;      // top-m surviving paths, by association
    std::size_t enumerated = 0;       // paths found before pruning
};

// Associations depend only on (path, predicate), not on the assertion's
// endpoints, so they are shared across a whole dataset. One cache instance
// assumes a fixed graph and options.
class PathAssociationCache {
public:
    const PathScore& lookup(const KnowledgeGraph& kg, const PredicatePath& path,
                            TermId predicate, const PathEvidenceOptions& opt) {
        auto key = std::make_pair(path, predicate);
        auto it = cache_.find(key);
        if (it == cache_.end())
            it = cache_.emplace(std::move(key), path_association(kg, path, predicate, opt))
                     .first;
        return it->second;
    }

    std::size_t size() const { return cache_.size(); }

private:
    std::map<std::pair<PredicatePath, TermId>, PathScore> cache_;
};

// ζ for one assertion: enumerate, score, frequency-prune, fuse the top m
// associations by noisy-or. No surviving path → ζ = 0.
inline PathVeracity path_veracity(const KnowledgeGraph& kg, TermId s, TermId predicate,
                                  TermId o, const PathEvidenceOptions& opt = {},
                                  PathAssociationCache* cache = nullptr) {
    PathVeracity result;
    std::vector<PredicatePath> paths = enumerate_paths(kg, s, o, predicate, opt);
    result.enumerated = paths.size();
    std::vector<PathScore> scored;
    for (const PredicatePath& path : paths) {
        PathScore score =
            cache ? cache->lookup(kg, path, predicate, opt) : path_association(kg, path, predicate, opt);
        if (score.support < opt.min_support) continue;
        scored.push_back(std::move(score));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const PathScore& a, const PathScore& b) {
                         return a.association > b.association;
                     });
    if (scored.size() > static_cast<std::size_t>(opt.top_m))
        scored.resize(static_cast<std::size_t>(opt.top_m));
    std::vector<double> assoc;
    assoc.reserve(scored.size());
    for (const PathScore& score : scored) assoc.push_back(score.association);
    result.zeta = noisy_or(assoc);
    result.used = std::move(scored);
    return result;
}

}  // namespace hybridfc
