#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "elrp/errors.hpp"
#include "elrp/instance.hpp"
#include "support/random_models.hpp"

using namespace elrp;

namespace {

std::string data(const std::string& name) { return testing::data_dir() + "/" + name; }

// Annuity factor written as 1 / sum of discount factors, independent of the closed form.
double annuity(double rate, int years) {
  long double pv = 0.0L;
  for (int y = 1; y <= years; ++y) pv += 1.0L / std::pow(1.0L + rate, y);
  return static_cast<double>(1.0L / pv);
}

InstanceData toy_data() { return load_instance(data("toy.json")).data(); }

}  // namespace

TEST_SUITE("instance") {
  TEST_CASE("capital recovery factor") {
    CHECK(capital_recovery_factor(0.05, 10) == doctest::Approx(0.1295046).epsilon(1e-7));
    CHECK(capital_recovery_factor(0.08, 15) == doctest::Approx(0.1168295).epsilon(1e-7));
    for (double r : {0.01, 0.05, 0.3, 0.99}) CHECK(capital_recovery_factor(r, 1) == doctest::Approx(1.0 + r));
    CHECK_THROWS_AS((void)capital_recovery_factor(0.0, 10), DomainError);
    CHECK_THROWS_AS((void)capital_recovery_factor(-0.1, 10), DomainError);
    CHECK_THROWS_AS((void)capital_recovery_factor(0.05, 0), DomainError);
  }

  TEST_CASE("capital recovery factor matches the annuity sum and is monotone") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> rate(0.001, 0.5);
    std::uniform_int_distribution<int> years(1, 40);
    for (int i = 0; i < 500; ++i) {
      const double r = rate(rng);
      const int y = years(rng);
      CHECK(capital_recovery_factor(r, y) == doctest::Approx(annuity(r, y)).epsilon(1e-12));
      CHECK(capital_recovery_factor(r * 1.01, y) > capital_recovery_factor(r, y));
      CHECK(capital_recovery_factor(r, y + 1) < capital_recovery_factor(r, y));
    }
  }

  TEST_CASE("bundled toy instance") {
    const Instance inst = load_instance(data("toy.json"));
    CHECK(inst.num_customers() == 2);
    CHECK(inst.num_stations() == 1);
    const VehicleType& v = inst.vehicle_types().front();
    CHECK(v.battery_capacity / v.consumption_rate == doctest::Approx(4.0));
  }

  TEST_CASE("bundled case-study instances") {
    for (const char* name : {"small_base.json", "small_tw.json", "small_rate15.json", "small_rate20.json"}) {
      CAPTURE(name);
      const Instance inst = load_instance(data(name));
      CHECK(inst.num_customers() == 5);
      CHECK(inst.num_stations() == 2);
      CHECK(inst.num_vehicle_types() == 2);
      CHECK(inst.base_name(inst.base_index().depot) == "D0");
    }
  }

  TEST_CASE("case-study variants differ from the base only in the studied knobs") {
    const Instance base = load_instance(data("small_base.json"));
    const Instance tw = load_instance(data("small_tw.json"));
    InstancePatch windows;
    windows.windows = {{"B", {1, 4}}, {"C", {6, 9}}, {"D", {2, 3}}};
    InstanceData expect = with_overrides(base, windows).data();
    expect.name = tw.data().name;
    expect.description = tw.data().description;
    CHECK(expect == tw.data());
    for (auto [file, rate] : {std::pair{"small_rate15.json", 15.0}, std::pair{"small_rate20.json", 20.0}}) {
      CAPTURE(file);
      const Instance r = load_instance(data(file));
      InstancePatch p;
      p.rated_power["F2"] = rate;
      InstanceData e = with_overrides(tw, p).data();
      e.name = r.data().name;
      e.description = r.data().description;
      CHECK(e == r.data());
    }
  }

  TEST_CASE("the reconstructed tour overshoots the larger truck's range by 40 kWh") {
    const Instance inst = load_instance(data("small_base.json"));
    const std::vector<std::string> tour{"D0", "B", "F2", "E", "C", "D0"};
    double length = 0.0;
    for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
      auto index = [&](const std::string& id) {
        for (int b = 0; b < inst.base_index().size; ++b) {
          if (inst.base_name(b) == id) return b;
        }
        FAIL("unknown node ", id);
        return -1;
      };
      const auto& e = inst.edge(index(tour[i]), index(tour[i + 1]));
      REQUIRE(e.has_value());
      length += e->distance;
    }
    const VehicleType& big = inst.vehicle_types()[1];
    CHECK(length * big.consumption_rate - big.battery_capacity == doctest::Approx(40.0));
  }

  TEST_CASE("window_early after window_late is rejected with the field name") {
    InstanceData d = toy_data();
    d.customers[0].window_early = 4;
    d.customers[0].window_late = 2;
    try {
      Instance bad(d);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "customers[0].window_early");
    }
  }

  TEST_CASE("other invariants are validated") {
    auto rejects = [](auto mutate) {
      InstanceData d = toy_data();
      mutate(d);
      CHECK_THROWS_AS(Instance{d}, ValidationError);
    };
    rejects([](InstanceData& d) { d.customers[0].window_late = d.economics.horizon + 1; });
    rejects([](InstanceData& d) { d.stations[0].rated_power = 0.0; });
    rejects([](InstanceData& d) { d.stations[0].size_min = 3; });
    rejects([](InstanceData& d) { d.stations[0].grid_capacity.pop_back(); });
    rejects([](InstanceData& d) { d.vehicle_types[0].battery_capacity = 0.0; });
    rejects([](InstanceData& d) { d.economics.discount_rate = 1.0; });
    rejects([](InstanceData& d) { d.economics.horizon = 0; });
    rejects([](InstanceData& d) { d.edges.push_back(d.edges.front()); });
    rejects([](InstanceData& d) { d.edges.front().distance = 0.0; });
    rejects([](InstanceData& d) { d.economics.service_fee.push_back(0.1); });
  }

  TEST_CASE("malformed documents raise ParseError") {
    CHECK_THROWS_AS((void)parse_instance("{"), ParseError);
    CHECK_THROWS_AS((void)parse_instance("[]"), ParseError);
    CHECK_THROWS_AS((void)parse_instance(R"({"meta": {"schema": 1}})"), ParseError);
    CHECK_THROWS_AS((void)load_instance(data("missing.json")), ParseError);
  }

  TEST_CASE("save then load is the identity") {
    for (const char* name : {"toy.json", "small_base.json", "small_tw.json"}) {
      const Instance inst = load_instance(data(name));
      CHECK(parse_instance(serialize_instance(inst)).data() == inst.data());
    }
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const Instance inst(testing::random_instance(seed));
      CHECK(parse_instance(serialize_instance(inst)).data() == inst.data());
    }
    const auto path = std::filesystem::temp_directory_path() / "elrp_roundtrip.json";
    const Instance toy = load_instance(data("toy.json"));
    save_instance(toy, path);
    CHECK(load_instance(path).data() == toy.data());
    std::filesystem::remove(path);
  }

  TEST_CASE("overrides") {
    const Instance base = load_instance(data("small_base.json"));
    const InstanceData before = base.data();

    const Instance fee = with_overrides(base, InstancePatch::uniform_fee(base, 0.3));
    InstanceData expect = before;
    expect.economics.service_fee = {0.3, 0.3};
    CHECK(fee.data() == expect);

    InstancePatch windows;
    windows.windows = {{"B", {1, 4}}, {"C", {6, 9}}, {"D", {2, 3}}};
    const Instance tight = with_overrides(base, windows);
    CHECK(tight.customers()[1].window_early == 1);
    CHECK(tight.customers()[1].window_late == 4);
    CHECK(tight.customers()[3].window_late == 3);

    CHECK(with_overrides(base, InstancePatch{}).data() == before);
    CHECK(base.data() == before);

    InstancePatch bad;
    bad.windows = {{"B", {5, 2}}};
    CHECK_THROWS_AS((void)with_overrides(base, bad), ValidationError);
    InstancePatch unknown;
    unknown.rated_power["F9"] = 10.0;
    CHECK_THROWS_AS((void)with_overrides(base, unknown), ValidationError);
    InstancePatch port;
    port.port_cost["F1"] = 12000.0;
    CHECK(with_overrides(base, port).stations()[0].port_cost == 12000.0);
  }
}
