#include "elrp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "elrp/errors.hpp"
#include "elrp/log.hpp"

namespace elrp {

using nlohmann::json;

std::string Money::to_string() const {
  const std::int64_t abs = micros_ < 0 ? -micros_ : micros_;
  return fmt::format("{}{}.{:06d}", micros_ < 0 ? "-" : "", abs / kScale, abs % kScale);
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Depot: return "depot";
    case NodeKind::DepotSink: return "sink";
    case NodeKind::Customer: return "customer";
    case NodeKind::StationCandidate: return "station";
    case NodeKind::StationDummy: return "dummy";
  }
  return "?";
}

double StationCandidate::min_grid_capacity() const {
  if (grid_capacity.empty()) return 0.0;
  return *std::min_element(grid_capacity.begin(), grid_capacity.end());
}

double capital_recovery_factor(double rate, int years) {
  if (!(rate > 0.0)) throw DomainError(fmt::format("capital recovery factor: rate must be > 0, got {}", rate));
  if (years < 1) throw DomainError(fmt::format("capital recovery factor: years must be >= 1, got {}", years));
  const double growth = std::pow(1.0 + rate, years);
  return rate * growth / (growth - 1.0);
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void validate(const InstanceData& d) {
  const Economics& e = d.economics;
  require(e.discount_rate > 0.0 && e.discount_rate < 1.0, "economics.discount_rate", "must lie in (0,1)");
  require(e.horizon >= 1, "economics.horizon", "must be >= 1");
  require(e.time_step_hours > 0.0 && std::isfinite(e.time_step_hours), "economics.time_step_hours", "must be > 0");
  require(e.station_life_years >= 1, "economics.station_life_years", "must be >= 1");
  require(e.vehicle_life_years >= 1, "economics.vehicle_life_years", "must be >= 1");
  require(e.operating_days > 0.0 && std::isfinite(e.operating_days), "economics.operating_days", "must be > 0");
  require(e.service_fee.size() == d.stations.size(), "economics.service_fee",
          "needs one entry per station");
  for (std::size_t i = 0; i < e.service_fee.size(); ++i) {
    require(finite_nonneg(e.service_fee[i]), fmt::format("economics.service_fee[{}]", i), "must be >= 0");
  }
  if (e.max_route_length) {
    require(*e.max_route_length > 0.0, "economics.max_route_length", "must be > 0");
  }

  std::set<std::string> ids{d.depot_id};
  require(!d.depot_id.empty(), "depot.id", "must not be empty");
  require(!d.customers.empty(), "customers", "at least one customer is required");
  require(d.customers.size() <= 64, "customers", "at most 64 customers are supported");
  for (std::size_t i = 0; i < d.customers.size(); ++i) {
    const Customer& c = d.customers[i];
    const std::string f = fmt::format("customers[{}]", i);
    require(!c.id.empty() && ids.insert(c.id).second, f + ".id", "must be non-empty and unique");
    require(finite_nonneg(c.demand), f + ".demand", "must be >= 0");
    require(c.window_early >= 0, f + ".window_early", "must be >= 0");
    require(c.window_early <= c.window_late, f + ".window_early", "must be <= window_late");
    require(c.window_late <= e.horizon, f + ".window_late", "must be <= horizon");
    require(c.service_time >= 0, f + ".service_time", "must be >= 0");
  }
  for (std::size_t i = 0; i < d.stations.size(); ++i) {
    const StationCandidate& s = d.stations[i];
    const std::string f = fmt::format("stations[{}]", i);
    require(!s.id.empty() && ids.insert(s.id).second, f + ".id", "must be non-empty and unique");
    require(s.size_min >= 0 && s.size_min <= s.size_max, f + ".size_min", "need 0 <= size_min <= size_max");
    require(s.rated_power > 0.0 && std::isfinite(s.rated_power), f + ".rated_power", "must be > 0");
    require(finite_nonneg(s.port_cost), f + ".port_cost", "must be >= 0");
    require(finite_nonneg(s.upgrade_cost), f + ".upgrade_cost", "must be >= 0");
    require(static_cast<int>(s.grid_capacity.size()) == e.horizon, f + ".grid_capacity",
            "length must equal horizon");
    require(static_cast<int>(s.electricity_price.size()) == e.horizon, f + ".electricity_price",
            "length must equal horizon");
    for (double v : s.grid_capacity) require(finite_nonneg(v), f + ".grid_capacity", "must be >= 0");
    for (double v : s.electricity_price) require(finite_nonneg(v), f + ".electricity_price", "must be >= 0");
    require(std::is_sorted(s.slots.begin(), s.slots.end()) &&
                std::adjacent_find(s.slots.begin(), s.slots.end()) == s.slots.end(),
            f + ".slots", "must be strictly increasing");
    for (int t : s.slots) require(t >= 0 && t < e.horizon, f + ".slots", "must lie in [0, horizon)");
  }
  require(!d.vehicle_types.empty(), "vehicle_types", "at least one vehicle type is required");
  std::set<int> type_ids;
  for (std::size_t i = 0; i < d.vehicle_types.size(); ++i) {
    const VehicleType& v = d.vehicle_types[i];
    const std::string f = fmt::format("vehicle_types[{}]", i);
    require(type_ids.insert(v.id).second, f + ".id", "must be unique");
    require(v.freight_capacity > 0.0, f + ".freight_capacity", "must be > 0");
    require(v.battery_capacity > 0.0, f + ".battery_capacity", "must be > 0");
    require(v.consumption_rate > 0.0, f + ".consumption_rate", "must be > 0");
    require(v.purchase_cost > 0.0, f + ".purchase_cost", "must be > 0");
    require(v.travel_cost_per_length > 0.0, f + ".travel_cost_per_length", "must be > 0");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    const Edge& ed = d.edges[i];
    const std::string f = fmt::format("edges[{}]", i);
    require(ids.count(ed.from) == 1, f + ".from", "unknown node '" + ed.from + "'");
    require(ids.count(ed.to) == 1, f + ".to", "unknown node '" + ed.to + "'");
    require(ed.from != ed.to, f, "self loops are not allowed");
    require(ed.distance > 0.0 && std::isfinite(ed.distance), f + ".distance", "must be > 0");
    require(ed.travel_time >= 0, f + ".travel_time", "must be >= 0");
    auto key = std::minmax(ed.from, ed.to);
    require(seen.insert({key.first, key.second}).second, f, "duplicate edge");
  }
}

}  // namespace

Instance::Instance(InstanceData data) : data_(std::move(data)) {
  for (StationCandidate& s : data_.stations) {
    if (s.slots.empty()) {
      s.slots.resize(static_cast<std::size_t>(std::max(data_.economics.horizon, 0)));
      for (int t = 0; t < static_cast<int>(s.slots.size()); ++t) s.slots[static_cast<std::size_t>(t)] = t;
    }
  }
  validate(data_);

  index_.depot = 0;
  index_.first_customer = 1;
  index_.first_station = 1 + num_customers();
  index_.size = index_.first_station + num_stations();
  base_names_.push_back(data_.depot_id);
  for (const Customer& c : data_.customers) base_names_.push_back(c.id);
  for (const StationCandidate& s : data_.stations) base_names_.push_back(s.id);

  std::map<std::string, int> by_id;
  for (int i = 0; i < index_.size; ++i) by_id[base_names_[static_cast<std::size_t>(i)]] = i;
  edges_.assign(static_cast<std::size_t>(index_.size * index_.size), std::nullopt);
  for (const Edge& e : data_.edges) {
    const int a = by_id.at(e.from);
    const int b = by_id.at(e.to);
    edges_[static_cast<std::size_t>(a * index_.size + b)] = EdgeData{e.distance, e.travel_time};
    edges_[static_cast<std::size_t>(b * index_.size + a)] = EdgeData{e.distance, e.travel_time};
  }

  // Every customer must be reachable from the depot over declared edges.
  std::vector<char> seen(static_cast<std::size_t>(index_.size), 0);
  std::queue<int> frontier;
  frontier.push(index_.depot);
  seen[static_cast<std::size_t>(index_.depot)] = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v = 0; v < index_.size; ++v) {
      if (!seen[static_cast<std::size_t>(v)] && edge(u, v)) {
        seen[static_cast<std::size_t>(v)] = 1;
        frontier.push(v);
      }
    }
  }
  for (int c = 0; c < num_customers(); ++c) {
    require(seen[static_cast<std::size_t>(customer_base(c))] != 0, fmt::format("customers[{}]", c),
            "not reachable from the depot");
  }

  station_crf_ = capital_recovery_factor(data_.economics.discount_rate, data_.economics.station_life_years);
  vehicle_crf_ = capital_recovery_factor(data_.economics.discount_rate, data_.economics.vehicle_life_years);
}

std::optional<int> Instance::station_index(const std::string& id) const {
  for (int i = 0; i < num_stations(); ++i) {
    if (data_.stations[static_cast<std::size_t>(i)].id == id) return i;
  }
  return std::nullopt;
}

std::optional<int> Instance::customer_index(const std::string& id) const {
  for (int i = 0; i < num_customers(); ++i) {
    if (data_.customers[static_cast<std::size_t>(i)].id == id) return i;
  }
  return std::nullopt;
}

const std::string& Instance::base_name(int base) const { return base_names_.at(static_cast<std::size_t>(base)); }

std::vector<std::string> triangle_warnings(const Instance& instance) {
  std::vector<std::string> out;
  const int n = instance.base_index().size;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& ij = instance.edge(i, j);
      if (!ij) continue;
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const auto& ik = instance.edge(i, k);
        const auto& kj = instance.edge(k, j);
        if (ik && kj && ik->distance + kj->distance < ij->distance - 1e-9) {
          out.push_back(fmt::format("{}-{} is longer than {}-{}-{}", instance.base_name(i), instance.base_name(j),
                                    instance.base_name(i), instance.base_name(k), instance.base_name(j)));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// File format

namespace {

constexpr int kSchemaVersion = 1;

template <typename T>
T get_field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ParseError(fmt::format("missing field '{}.{}'", path, key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("field '{}.{}': {}", path, key, e.what()));
  }
}

std::vector<double> per_step(const json& j, const char* key, const std::string& path, int horizon) {
  if (!j.contains(key)) throw ParseError(fmt::format("missing field '{}.{}'", path, key));
  const json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(std::max(horizon, 0)), v.get<double>());
  return get_field<std::vector<double>>(j, key, path);
}

InstanceData from_json(const json& root) {
  if (!root.is_object()) throw ParseError("instance document must be an object");
  for (const char* key : {"meta", "economics", "depot", "customers", "stations", "vehicle_types", "edges"}) {
    if (!root.contains(key)) throw ParseError(fmt::format("missing top-level key '{}'", key));
  }
  InstanceData d;
  const json& meta = root.at("meta");
  const int schema = get_field<int>(meta, "schema", "meta");
  if (schema != kSchemaVersion) throw ParseError(fmt::format("unsupported schema version {}", schema));
  d.name = meta.value("name", "");
  d.description = meta.value("description", "");

  const json& eco = root.at("economics");
  d.economics.discount_rate = get_field<double>(eco, "discount_rate", "economics");
  d.economics.station_life_years = get_field<int>(eco, "station_life_years", "economics");
  d.economics.vehicle_life_years = get_field<int>(eco, "vehicle_life_years", "economics");
  d.economics.time_step_hours = get_field<double>(eco, "time_step_hours", "economics");
  d.economics.horizon = get_field<int>(eco, "horizon", "economics");
  d.economics.service_fee = get_field<std::vector<double>>(eco, "service_fee", "economics");
  d.economics.operating_days = eco.value("operating_days", 1.0);
  if (eco.contains("max_route_length") && !eco.at("max_route_length").is_null()) {
    d.economics.max_route_length = get_field<double>(eco, "max_route_length", "economics");
  }
  const int horizon = d.economics.horizon;

  d.depot_id = get_field<std::string>(root.at("depot"), "id", "depot");

  for (std::size_t i = 0; i < root.at("customers").size(); ++i) {
    const json& c = root.at("customers").at(i);
    const std::string p = fmt::format("customers[{}]", i);
    Customer cu;
    cu.id = get_field<std::string>(c, "id", p);
    cu.demand = get_field<double>(c, "demand", p);
    const auto window = get_field<std::vector<int>>(c, "window", p);
    if (window.size() != 2) throw ParseError(p + ".window must have two entries");
    cu.window_early = window[0];
    cu.window_late = window[1];
    cu.service_time = c.value("service_time", 0);
    d.customers.push_back(std::move(cu));
  }
  for (std::size_t i = 0; i < root.at("stations").size(); ++i) {
    const json& s = root.at("stations").at(i);
    const std::string p = fmt::format("stations[{}]", i);
    StationCandidate st;
    st.id = get_field<std::string>(s, "id", p);
    st.grid_capacity = per_step(s, "grid_capacity", p, horizon);
    st.rated_power = get_field<double>(s, "rated_power", p);
    st.port_cost = get_field<double>(s, "port_cost", p);
    st.upgrade_cost = get_field<double>(s, "upgrade_cost", p);
    st.electricity_price = per_step(s, "electricity_price", p, horizon);
    st.size_min = get_field<int>(s, "size_min", p);
    st.size_max = get_field<int>(s, "size_max", p);
    if (s.contains("slots")) st.slots = get_field<std::vector<int>>(s, "slots", p);
    d.stations.push_back(std::move(st));
  }
  for (std::size_t i = 0; i < root.at("vehicle_types").size(); ++i) {
    const json& v = root.at("vehicle_types").at(i);
    const std::string p = fmt::format("vehicle_types[{}]", i);
    VehicleType vt;
    vt.id = get_field<int>(v, "id", p);
    vt.freight_capacity = get_field<double>(v, "freight_capacity", p);
    vt.battery_capacity = get_field<double>(v, "battery_capacity", p);
    vt.consumption_rate = get_field<double>(v, "consumption_rate", p);
    vt.purchase_cost = get_field<double>(v, "purchase_cost", p);
    vt.travel_cost_per_length = get_field<double>(v, "travel_cost_per_length", p);
    d.vehicle_types.push_back(vt);
  }
  for (std::size_t i = 0; i < root.at("edges").size(); ++i) {
    const json& e = root.at("edges").at(i);
    const std::string p = fmt::format("edges[{}]", i);
    Edge ed;
    ed.from = get_field<std::string>(e, "from", p);
    ed.to = get_field<std::string>(e, "to", p);
    ed.distance = get_field<double>(e, "distance", p);
    ed.travel_time = get_field<int>(e, "travel_time", p);
    d.edges.push_back(std::move(ed));
  }
  return d;
}

json to_json(const InstanceData& d) {
  json root;
  root["meta"] = {{"schema", kSchemaVersion}, {"name", d.name}, {"description", d.description}};
  json eco = {{"discount_rate", d.economics.discount_rate},
              {"station_life_years", d.economics.station_life_years},
              {"vehicle_life_years", d.economics.vehicle_life_years},
              {"time_step_hours", d.economics.time_step_hours},
              {"horizon", d.economics.horizon},
              {"operating_days", d.economics.operating_days},
              {"service_fee", d.economics.service_fee}};
  if (d.economics.max_route_length) eco["max_route_length"] = *d.economics.max_route_length;
  root["economics"] = eco;
  root["depot"] = {{"id", d.depot_id}};
  root["customers"] = json::array();
  for (const Customer& c : d.customers) {
    root["customers"].push_back({{"id", c.id},
                                 {"demand", c.demand},
                                 {"window", {c.window_early, c.window_late}},
                                 {"service_time", c.service_time}});
  }
  root["stations"] = json::array();
  for (const StationCandidate& s : d.stations) {
    root["stations"].push_back({{"id", s.id},
                                {"grid_capacity", s.grid_capacity},
                                {"rated_power", s.rated_power},
                                {"port_cost", s.port_cost},
                                {"upgrade_cost", s.upgrade_cost},
                                {"electricity_price", s.electricity_price},
                                {"size_min", s.size_min},
                                {"size_max", s.size_max},
                                {"slots", s.slots}});
  }
  root["vehicle_types"] = json::array();
  for (const VehicleType& v : d.vehicle_types) {
    root["vehicle_types"].push_back({{"id", v.id},
                                     {"freight_capacity", v.freight_capacity},
                                     {"battery_capacity", v.battery_capacity},
                                     {"consumption_rate", v.consumption_rate},
                                     {"purchase_cost", v.purchase_cost},
                                     {"travel_cost_per_length", v.travel_cost_per_length}});
  }
  root["edges"] = json::array();
  for (const Edge& e : d.edges) {
    root["edges"].push_back(
        {{"from", e.from}, {"to", e.to}, {"distance", e.distance}, {"travel_time", e.travel_time}});
  }
  return root;
}

}  // namespace

Instance parse_instance(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  }
  Instance instance(from_json(root));
  for (const std::string& w : triangle_warnings(instance)) {
    log().warn("instance '{}': triangle inequality fails: {}", instance.name(), w);
  }
  return instance;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string serialize_instance(const Instance& instance) { return to_json(instance.data()).dump(2) + "\n"; }

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write instance file '" + path.string() + "'");
  out << serialize_instance(instance);
}

InstancePatch InstancePatch::uniform_fee(const Instance& base, double fee) {
  InstancePatch p;
  p.service_fee = std::vector<double>(static_cast<std::size_t>(base.num_stations()), fee);
  return p;
}

Instance with_overrides(const Instance& base, const InstancePatch& patch) {
  InstanceData d = base.data();
  if (patch.service_fee) d.economics.service_fee = *patch.service_fee;
  for (const auto& [id, window] : patch.windows) {
    auto c = base.customer_index(id);
    if (!c) throw ValidationError("windows", "unknown customer '" + id + "'");
    d.customers[static_cast<std::size_t>(*c)].window_early = window.first;
    d.customers[static_cast<std::size_t>(*c)].window_late = window.second;
  }
  for (const auto& [id, power] : patch.rated_power) {
    auto s = base.station_index(id);
    if (!s) throw ValidationError("rated_power", "unknown station '" + id + "'");
    d.stations[static_cast<std::size_t>(*s)].rated_power = power;
  }
  for (const auto& [id, cost] : patch.port_cost) {
    auto s = base.station_index(id);
    if (!s) throw ValidationError("port_cost", "unknown station '" + id + "'");
    d.stations[static_cast<std::size_t>(*s)].port_cost = cost;
  }
  return Instance(std::move(d));
}

}  // namespace elrp
