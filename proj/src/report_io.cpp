#include "irbl/report_io.hpp"

#include "irbl/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace irbl::report {

using json = nlohmann::json;

double round9(double x) {
    if (!std::isfinite(x)) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::strtod(buf, nullptr);
}

std::string format9(double x) {
    if (!std::isfinite(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

namespace {

json num(double x) { return std::isfinite(x) ? json(round9(x)) : json(nullptr); }
json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

}  // namespace

std::string report_json(const sim::RunReport& r) {
    json agents = json::array();
    for (const auto& m : r.agents) {
        agents.push_back({{"l", num(m.l)},
                          {"t", num(m.t)},
                          {"vbar", num(m.vbar)},
                          {"vmax", num(m.vmax)},
                          {"dmin", num(m.dmin)},
                          {"domin", num(m.domin)},
                          {"sr_acc", m.sr_acc},
                          {"sr_conv", m.sr_conv},
                          {"sr_safe", m.sr_safe}});
    }
    json j = {{"seed", r.seed},
              {"end_time", num(r.end_time)},
              {"tau", {{"tau", num(r.tau.tau)}, {"std_error", num(r.tau.std_error)}, {"trials", r.tau.trials}}},
              {"infeasible_ticks", r.infeasible_ticks},
              {"mpc_relaxed_ticks", r.mpc_relaxed_ticks},
              {"aborted", r.aborted},
              {"agents", agents}};
    return j.dump(2) + "\n";
}

std::string trajectory_csv(const sim::Trajectory& tr) {
    std::string out = "t,x,y,z,vx,vy,vz,ax,ay,az,yaw\n";
    for (const auto& s : tr) {
        const double v[] = {s.t,     s.p.x(), s.p.y(), s.p.z(), s.v.x(), s.v.y(),
                            s.v.z(), s.a.x(), s.a.y(), s.a.z(), s.yaw};
        for (std::size_t k = 0; k < std::size(v); ++k) {
            if (k) out += ',';
            out += format9(v[k]);
        }
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream f(file, std::ios::binary);
    if (!f) throw Error("cannot write " + file.string());
    f << text;
}

void write_run(const std::filesystem::path& dir, const sim::RunReport& r) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", report_json(r));
    for (std::size_t i = 0; i < r.trajectories.size(); ++i)
        write_text(dir / ("traj_" + std::to_string(i) + ".csv"), trajectory_csv(r.trajectories[i]));
}

std::string summary_header() { return "scenario,fov,delta,seed,agent,tau,l,t,vbar,vmax,dmin,domin,sr_acc,sr_conv,sr_safe\n"; }

std::string summary_rows(const SummaryKey& key, const sim::RunReport* r, std::size_t n_agents) {
    std::ostringstream os;
    const std::size_t n = r ? r->agents.size() : n_agents;
    for (std::size_t i = 0; i < n; ++i) {
        os << key.scenario << ',' << key.fov << ',' << format9(key.delta) << ',' << key.seed << ',' << i << ',';
        if (!r) {
            os << ",,,,,,,,,\n";
            continue;
        }
        const auto& m = r->agents[i];
        auto opt = [](const std::optional<double>& x) { return x ? format9(*x) : std::string(); };
        auto b = [](bool x) { return x ? "1" : "0"; };
        os << format9(r->tau.tau) << ',' << format9(m.l) << ',' << opt(m.t) << ',' << opt(m.vbar) << ','
           << format9(m.vmax) << ',' << format9(m.dmin) << ',' << format9(m.domin) << ',' << b(m.sr_acc) << ','
           << b(m.sr_conv) << ',' << b(m.sr_safe) << '\n';
    }
    return os.str();
}

}  // namespace irbl::report
