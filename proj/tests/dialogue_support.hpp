#pragma once

#include "itinera/common/errors.hpp"
#include "itinera/dialogue/session.hpp"
#include "itinera/planner/planner.hpp"
#include "test_support.hpp"

#include <vector>

namespace itinera::testing {

/// Runner that plans over the catalog with the real planner and answers everything else with fixed text.
class PlannerRunner : public dialogue::ActionRunner {
public:
    explicit PlannerRunner(const catalog::Catalog& catalog) : catalog_(catalog) {}

    dialogue::ActionOutcome run(const dialogue::Action& action, const dialogue::SessionState& s) override {
        actions.push_back(action);
        dialogue::ActionOutcome out;
        if (action.kind != dialogue::ActionKind::plan) {
            out.reply = std::string(dialogue::to_string(action.kind));
            return out;
        }
        const auto request = s.request();
        std::vector<catalog::Poi> candidates;
        for (const auto& p : catalog_.find_pois(request.destination, {}, catalog_.size())) {
            if (!s.drops.contains(p.id)) {
                candidates.push_back(p);
            }
        }
        const auto matrix = catalog::build_matrix(candidates, catalog::TravelMode::walk);
        planner::PlanResult result;
        try {
            result = s.current_itinerary && !s.locks.empty()
                         ? planner::replan(request, *s.current_itinerary, s.locks, s.drops, candidates, matrix)
                         : planner::plan(request, candidates, matrix);
        } catch (const ValidationError&) {
            out.events.push_back({{"type", "refine"}, {"locks", nlohmann::json::array()}, {"drops", s.drops}});
            result = planner::plan(request, candidates, matrix);
        }
        out.events.push_back({{"type", "itinerary"}, {"itinerary", result.itinerary}});
        out.reply = "planned " + std::to_string(result.itinerary.visit_count());
        return out;
    }

    std::vector<dialogue::Action> actions;

private:
    const catalog::Catalog& catalog_;
};

}  // namespace itinera::testing
