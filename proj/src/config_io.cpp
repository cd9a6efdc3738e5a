#include "swarmform/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace swarmform {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string prefix)
      : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) {
      throw ConfigError(prefix_.empty() ? "" : prefix_.substr(0, prefix_.size() - 1),
                        "expected a JSON object");
    }
  }

  std::string key(const std::string& k) const { return prefix_ + k; }

  const json* find(const std::string& k) {
    auto it = obj_.find(k);
    if (it == obj_.end()) return nullptr;
    used_.insert(k);
    return &*it;
  }

  void get(const std::string& k, double& out) {
    if (const json* v = find(k)) {
      if (!v->is_number()) throw ConfigError(key(k), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& k, Int& out) {
    if (const json* v = find(k)) {
      if constexpr (std::is_same_v<Int, bool>) {
        if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
        out = v->get<bool>();
      } else {
        if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
        if constexpr (std::is_unsigned_v<Int>) {
          if (v->is_number_unsigned()) {
            out = v->get<Int>();
          } else {
            if (v->get<std::int64_t>() < 0) throw ConfigError(key(k), "must be >= 0");
            out = static_cast<Int>(v->get<std::int64_t>());
          }
        } else {
          out = static_cast<Int>(v->get<std::int64_t>());
        }
      }
    }
  }

  template <typename Enum>
  void get_enum(const std::string& k, Enum& out,
                std::initializer_list<std::pair<const char*, Enum>> names) {
    const json* v = find(k);
    if (v == nullptr) return;
    if (v->is_string()) {
      for (const auto& [name, value] : names) {
        if (v->get<std::string>() == name) {
          out = value;
          return;
        }
      }
    }
    std::string allowed;
    for (const auto& [name, value] : names) {
      allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    }
    throw ConfigError(key(k), "expected one of: " + allowed);
  }

  Reader child(const std::string& k) {
    static const json kEmpty = json::object();
    const json* v = find(k);
    return Reader(v ? *v : kEmpty, prefix_ + k + ".");
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> used_;
};

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must have the form KEY=VALUE");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError(key, "malformed key");
    if (!node->is_object()) {
      throw ConfigError(key.substr(0, start - 1), "is not an object");
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

void read_rollout(Reader r, RolloutParams& p) {
  r.get("horizon", p.horizon);
  r.get("violation_penalty", p.violation_penalty);
  r.get("w_theta", p.w_theta);
  r.finish();
}

ScenarioConfig from_document(const json& doc) {
  ScenarioConfig c;
  Reader top(doc, "");
  top.get("n_robots", c.n_robots);
  top.get("area_side", c.area_side);
  top.get("sensor_range", c.sensor_range);
  top.get("d_s", c.d_s);
  top.get("dt", c.dt);
  top.get("max_steps", c.max_steps);
  top.get("seed", c.seed);
  top.get("require_connected", c.require_connected);
  top.get("leader_avoids_collisions", c.leader_avoids_collisions);

  {
    Reader f = top.child("formation");
    f.get("l_d", c.formation.l_d);
    f.get("phi_left", c.formation.phi_left);
    f.get("phi_right", c.formation.phi_right);
    f.get_enum("mode", c.formation.mode,
               {{"v_shape", FormationMode::kVShape},
                {"flocking", FormationMode::kFlocking}});
    f.finish();
  }
  {
    Reader s = top.child("speed_limits");
    s.get("v_max", c.speed_limits.v_max);
    s.get("omega_max", c.speed_limits.omega_max);
    s.finish();
  }
  {
    Reader p = top.child("leader_path");
    LeaderPath& lp = c.leader_path;
    p.get_enum("type", lp.kind,
               {{"straight", PathKind::kStraight}, {"u_turn", PathKind::kUTurn}});
    if (const json* to = p.find("to"); to != nullptr && !to->is_null()) {
      if (!to->is_array() || to->size() != 2 || !(*to)[0].is_number() ||
          !(*to)[1].is_number()) {
        throw ConfigError(p.key("to"), "expected [x, y] or null");
      }
      lp.to = Eigen::Vector2d((*to)[0].get<double>(), (*to)[1].get<double>());
    }
    p.get("length", lp.length);
    p.get("leg", lp.leg);
    p.get("radius", lp.radius);
    bool right = lp.turn_right;
    p.get_enum("turn", right, {{"right", true}, {"left", false}});
    lp.turn_right = right;
    p.get("speed", lp.speed);
    p.get("hold_time", lp.hold_time);
    p.finish();
  }
  {
    Reader b = top.child("bso");
    TunerSettings& t = c.bso;
    b.get("population_size", t.population_size);
    b.get("perc_e", t.perc_e);
    b.get("p_e", t.p_e);
    b.get("p_one", t.p_one);
    b.get("slope", t.slope);
    b.get("disruption_prob", t.disruption_prob);
    b.get("gain_min", t.gain_min);
    b.get("gain_max", t.gain_max);
    b.get("update_inside_loop", t.update_inside_loop);
    b.get("refresh_period", t.refresh_period);
    read_rollout(b.child("rollout"), t.rollout);
    b.finish();
  }
  {
    Reader v = top.child("convergence");
    v.get("threshold", c.convergence.threshold);
    v.get("dwell", c.convergence.dwell);
    v.get("early_stop", c.convergence.early_stop);
    v.finish();
  }
  top.finish();
  c.validate();
  return c;
}

}  // namespace

ScenarioConfig config_from_json(std::string_view text,
                                const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);
  return from_document(doc);
}

ScenarioConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), overrides);
}

std::string config_to_json(const ScenarioConfig& c, int indent) {
  const LeaderPath& lp = c.leader_path;
  json path = {
      {"type", lp.kind == PathKind::kUTurn ? "u_turn" : "straight"},
      {"to", lp.to ? json::array({lp.to->x(), lp.to->y()}) : json(nullptr)},
      {"length", lp.length},
      {"leg", lp.leg},
      {"radius", lp.radius},
      {"turn", lp.turn_right ? "right" : "left"},
      {"speed", lp.speed},
      {"hold_time", lp.hold_time},
  };
  json doc = {
      {"n_robots", c.n_robots},
      {"area_side", c.area_side},
      {"sensor_range", c.sensor_range},
      {"d_s", c.d_s},
      {"dt", c.dt},
      {"max_steps", c.max_steps},
      {"seed", c.seed},
      {"require_connected", c.require_connected},
      {"leader_avoids_collisions", c.leader_avoids_collisions},
      {"formation",
       {{"l_d", c.formation.l_d},
        {"phi_left", c.formation.phi_left},
        {"phi_right", c.formation.phi_right},
        {"mode", c.formation.mode == FormationMode::kFlocking ? "flocking" : "v_shape"}}},
      {"speed_limits",
       {{"v_max", c.speed_limits.v_max}, {"omega_max", c.speed_limits.omega_max}}},
      {"leader_path", path},
      {"bso",
       {{"population_size", c.bso.population_size},
        {"perc_e", c.bso.perc_e},
        {"p_e", c.bso.p_e},
        {"p_one", c.bso.p_one},
        {"slope", c.bso.slope},
        {"disruption_prob", c.bso.disruption_prob},
        {"gain_min", c.bso.gain_min},
        {"gain_max", c.bso.gain_max},
        {"update_inside_loop", c.bso.update_inside_loop},
        {"refresh_period", c.bso.refresh_period},
        {"rollout",
         {{"horizon", c.bso.rollout.horizon},
          {"violation_penalty", c.bso.rollout.violation_penalty},
          {"w_theta", c.bso.rollout.w_theta}}}}},
      {"convergence",
       {{"threshold", c.convergence.threshold},
        {"dwell", c.convergence.dwell},
        {"early_stop", c.convergence.early_stop}}},
  };
  return doc.dump(indent) + "\n";
}

}  // namespace swarmform
