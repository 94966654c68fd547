#include "netobs/placement.hpp"

#include "netobs/design.hpp"
#include "netobs/obsv.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace netobs::placement {

CoverageTable coverage_sets(const graph::InferenceGraph& g, const NodeSet& candidates) {
    std::vector<int> cand_pos(g.node_count(), -1);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (candidates[k] < 0 || candidates[k] >= g.node_count())
            throw InputError("coverage_sets: candidate out of range");
        cand_pos[candidates[k]] = static_cast<int>(k);
    }
    CoverageTable table;
    table.candidates = candidates;
    table.sets.resize(candidates.size());
    for (int t : g.targets()) {
        for (int w : graph::reachable_from(g, t))
            if (cand_pos[w] >= 0) table.sets[cand_pos[w]].push_back(t);
    }
    return table;
}

NodeSet greedy_sensor_placement(const graph::InferenceGraph& g, const NodeSet& candidates) {
    CoverageTable table = coverage_sets(g, candidates);

    std::set<int> coverable;
    for (const auto& s : table.sets) coverable.insert(s.begin(), s.end());
    std::vector<int> missing;
    for (int t : g.targets())
        if (!coverable.count(t)) missing.push_back(t);
    if (!missing.empty()) {
        std::ostringstream os;
        os << "greedy_sensor_placement: no candidate covers target(s)";
        for (int t : missing) os << " " << t;
        throw InfeasibleError(os.str());
    }

    std::set<int> covered;
    std::vector<char> used(candidates.size(), 0);
    NodeSet sensors;
    const std::size_t want = g.targets().size();
    while (covered.size() < want) {
        int best = -1;
        std::size_t best_gain = 0;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (used[k]) continue;
            std::size_t gain = 0;
            for (int t : table.sets[k])
                if (!covered.count(t)) ++gain;
            // strict > keeps the lowest-index winner on ties (candidates
            // are scanned in caller order; lowest node index wins among
            // equal-gain, equal-order duplicates)
            if (gain > best_gain ||
                (gain == best_gain && gain > 0 && best >= 0 &&
                 candidates[k] < candidates[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(k);
                best_gain = gain;
            }
        }
        if (best < 0 || best_gain == 0)
            throw InfeasibleError("greedy_sensor_placement: stalled before covering all targets");
        used[static_cast<std::size_t>(best)] = 1;
        sensors.push_back(candidates[static_cast<std::size_t>(best)]);
        covered.insert(table.sets[static_cast<std::size_t>(best)].begin(),
                       table.sets[static_cast<std::size_t>(best)].end());
    }
    std::sort(sensors.begin(), sensors.end());
    return sensors;
}

NodeSet min_sensors_exact(const graph::InferenceGraph& g, const NodeSet& candidates) {
    if (candidates.size() > 20) throw InputError("min_sensors_exact: more than 20 candidates");
    CoverageTable table = coverage_sets(g, candidates);

    std::vector<int> t_index(g.node_count(), -1);
    for (std::size_t k = 0; k < g.targets().size(); ++k) t_index[g.targets()[k]] = static_cast<int>(k);
    const std::uint32_t full = g.targets().size() >= 32
                                   ? 0xffffffffu
                                   : ((1u << g.targets().size()) - 1u);
    if (g.targets().size() > 32) throw InputError("min_sensors_exact: more than 32 targets");

    std::vector<std::uint32_t> masks(candidates.size(), 0);
    for (std::size_t k = 0; k < candidates.size(); ++k)
        for (int t : table.sets[k]) masks[k] |= 1u << t_index[t];

    const int m = static_cast<int>(candidates.size());
    for (int size = 0; size <= m; ++size) {
        // enumerate subsets of exactly `size` candidates
        std::vector<int> idx(size);
        for (int i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            std::uint32_t acc = 0;
            for (int i : idx) acc |= masks[static_cast<std::size_t>(i)];
            if (acc == full) {
                NodeSet out;
                for (int i : idx) out.push_back(candidates[static_cast<std::size_t>(i)]);
                return out;
            }
            int pos = size - 1;
            while (pos >= 0 && idx[pos] == m - size + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (int i = pos + 1; i < size; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    throw InfeasibleError("min_sensors_exact: targets cannot be covered by any candidate subset");
}

NodeSet order_minimizing_placement(const graph::InferenceGraph& g, const NodeSet& base_sensors,
                                   const NodeSet& candidates, int q_total) {
    if (q_total < static_cast<int>(base_sensors.size()))
        throw InputError("order_minimizing_placement: q_total below the base placement size");
    graph::InferenceGraph current = g.with_sensors(base_sensors);
    if (!obsv::is_structurally_functionally_observable(current))
        throw InfeasibleError("order_minimizing_placement: base placement is not structurally "
                              "functionally observable");
    NodeSet sensors = base_sensors;
    std::set<int> taken(sensors.begin(), sensors.end());
    std::set<int> target_set(g.targets().begin(), g.targets().end());

    while (static_cast<int>(sensors.size()) < q_total) {
        int best_node = -1;
        int best_r0 = -1;
        for (int cand : candidates) {
            if (taken.count(cand) || target_set.count(cand)) continue;
            NodeSet trial = sensors;
            trial.push_back(cand);
            std::sort(trial.begin(), trial.end());
            int r0;
            try {
                r0 = static_cast<int>(design::minimal_f0(g.with_sensors(trial)).size());
            } catch (const InfeasibleError&) {
                continue;
            }
            if (best_node < 0 || r0 < best_r0 || (r0 == best_r0 && cand < best_node)) {
                best_node = cand;
                best_r0 = r0;
            }
        }
        if (best_node < 0) break;  // no candidate left to add
        sensors.push_back(best_node);
        taken.insert(best_node);
        std::sort(sensors.begin(), sensors.end());
    }
    return sensors;
}

}  // namespace netobs::placement
