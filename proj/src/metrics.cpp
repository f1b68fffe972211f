#include "irbl/sim.hpp"

#include <algorithm>
#include <cmath>

namespace irbl::sim {

std::vector<AgentMetrics> metrics_finalize(const MetricsInput& input) {
    const auto& trajs = *input.trajectories;
    const World& world = *input.world;
    const std::size_t n = trajs.size();
    std::vector<AgentMetrics> out(n);

    for (std::size_t i = 0; i < n; ++i) {
        const Trajectory& tr = trajs[i];
        AgentMetrics& m = out[i];
        const Vec3& goal = world.agents[i].goal;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const Sample& s = tr[k];
            if (k > 0) m.l += (s.p - tr[k - 1].p).norm();
            if (!m.t && (s.p - goal).norm() <= input.d_goal) m.t = s.t;
            m.vmax = std::max(m.vmax, s.v.norm());
            m.domin = std::min(m.domin, world.obstacle_distance(s.p));
            if (s.a.cwiseAbs().maxCoeff() > input.a_max + 1e-6) m.sr_acc = false;
        }
        m.sr_conv = m.t.has_value();
        if (m.t) m.vbar = *m.t > 0.0 ? m.l / *m.t : 0.0;
        if (m.domin < input.radii[i]) m.sr_safe = false;
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t len = std::min(trajs[i].size(), trajs[j].size());
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < len; ++k) d = std::min(d, (trajs[i][k].p - trajs[j][k].p).norm());
            out[i].dmin = std::min(out[i].dmin, d);
            out[j].dmin = std::min(out[j].dmin, d);
            if (d < input.radii[i] + input.radii[j]) out[i].sr_safe = out[j].sr_safe = false;
        }
    }
    return out;
}

}  // namespace irbl::sim
