#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "logit_sue/error.hpp"
#include "logit_sue/network.hpp"

using namespace sue;

namespace {

const char* kHeader =
    "<NUMBER OF ZONES> 2\n<NUMBER OF NODES> 3\n<FIRST THRU NODE> 1\n<NUMBER OF LINKS> 2\n"
    "<END OF METADATA>\n";

}  // namespace

TEST_CASE("braess net file parses into five affine links") {
  const auto net = load_tntp_net(fixtures::data_path("braess_net.tntp"));
  CHECK(net.link_count() == 5);
  CHECK(net.node_count == 4);
  for (const auto& l : net.links) CHECK(l.kind == CostKind::Affine);
  CHECK(link_cost(net.links[0], 2.0) == 2.0);
  CHECK(link_cost(net.links[1], 2.0) == 5.0);
}

TEST_CASE("empty link table") {
  const auto net = parse_tntp_net(
      "<NUMBER OF ZONES> 0\n<NUMBER OF NODES> 3\n<FIRST THRU NODE> 1\n<NUMBER OF LINKS> 0\n"
      "<END OF METADATA>\n");
  CHECK(net.link_count() == 0);
  CHECK(net.node_count == 3);
}

TEST_CASE("sioux falls files") {
  const auto net = load_tntp_net(fixtures::data_path("SiouxFalls_net.tntp"));
  CHECK(net.link_count() == 76);
  CHECK(net.node_count == 24);
  const auto trips = load_tntp_trips(fixtures::data_path("SiouxFalls_trips.tntp"));
  CHECK(trips.size() == 528);
  CHECK(trips.total_demand == doctest::Approx(360600.0));
  CHECK(trips.warnings.empty());
  for (std::size_t i = 1; i < trips.entries.size(); ++i) {
    const auto& a = trips.entries[i - 1];
    const auto& b = trips.entries[i];
    CHECK(std::pair(a.origin, a.destination) < std::pair(b.origin, b.destination));
  }
}

TEST_CASE("trip tables") {
  SUBCASE("all zero entries give an empty table") {
    const auto t = parse_tntp_trips(
        "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 0.0\n<END OF METADATA>\n\nOrigin 1\n 1 : 0.0; 2 : 0.0;\n");
    CHECK(t.size() == 0);
    CHECK(t.total_demand == 0.0);
  }
  SUBCASE("single entry") {
    const auto t = parse_tntp_trips(
        "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 6.0\n<END OF METADATA>\nOrigin 1\n 2 : 6.0;\n");
    REQUIRE(t.size() == 1);
    CHECK(t.entries[0].origin == 0);
    CHECK(t.entries[0].destination == 1);
    CHECK(t.entries[0].demand == 6.0);
  }
  SUBCASE("total mismatch is a warning") {
    const auto t = parse_tntp_trips(
        "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 10.0\n<END OF METADATA>\nOrigin 1\n 2 : 6.0;\n");
    CHECK(t.size() == 1);
    CHECK(t.warnings.size() == 1);
  }
  SUBCASE("mismatch within 0.5% is silent") {
    const auto t = parse_tntp_trips(
        "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 6.02\n<END OF METADATA>\nOrigin 1\n 2 : 6.0;\n");
    CHECK(t.warnings.empty());
  }
  SUBCASE("malformed triple names the line") {
    try {
      parse_tntp_trips("<NUMBER OF ZONES> 2\n<END OF METADATA>\nOrigin 1\n 2 6.0;\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
}

TEST_CASE("net parse errors") {
  SUBCASE("malformed header value names the tag") {
    try {
      parse_tntp_net("<NUMBER OF NODES> many\n<NUMBER OF LINKS> 0\n<END OF METADATA>\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("NUMBER OF NODES") != std::string::npos);
    }
  }
  SUBCASE("non-numeric field carries the line number") {
    try {
      parse_tntp_net(std::string(kHeader) + "1 2 10 1 x 0.15 4 0 0 1 ;\n2 3 10 1 1 0.15 4 0 0 1 ;\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("node beyond the declared count") {
    CHECK_THROWS_AS(parse_tntp_net(std::string(kHeader) +
                                   "1 2 10 1 1 0.15 4 0 0 1 ;\n2 4 10 1 1 0.15 4 0 0 1 ;\n"),
                    ValidationError);
  }
  SUBCASE("link count mismatch") {
    CHECK_THROWS_AS(parse_tntp_net(std::string(kHeader) + "1 2 10 1 1 0.15 4 0 0 1 ;\n"),
                    ValidationError);
  }
}

TEST_CASE("round trip reproduces link records") {
  const auto net = load_tntp_net(fixtures::data_path("SiouxFalls_net.tntp"));
  const auto back = parse_tntp_net(write_tntp_net(net));
  REQUIRE(back.link_count() == net.link_count());
  CHECK(back.node_count == net.node_count);
  CHECK(back.zone_count == net.zone_count);
  CHECK(back.first_thru_node == net.first_thru_node);
  for (int l = 0; l < net.link_count(); ++l) {
    const auto& a = net.links[l];
    const auto& b = back.links[l];
    CHECK(a.tail == b.tail);
    CHECK(a.head == b.head);
    CHECK(a.capacity == b.capacity);
    CHECK(a.length == b.length);
    CHECK(a.free_flow_time == b.free_flow_time);
    CHECK(a.bpr_alpha == b.bpr_alpha);
    CHECK(a.bpr_beta == b.bpr_beta);
    CHECK(a.speed == b.speed);
    CHECK(a.toll == b.toll);
    CHECK(a.link_type == b.link_type);
    CHECK(a.kind == b.kind);
  }
}

TEST_CASE("link cost examples") {
  Link l;
  l.free_flow_time = 3.0;
  l.capacity = 10.0;
  CHECK(link_cost(l, 0.0) == 3.0);
  CHECK(link_cost(l, 10.0) == doctest::Approx(1.15 * 3.0));
  CHECK_THROWS_AS(link_cost(l, -1.0), DomainError);
  CHECK_THROWS_AS(link_cost_derivative(l, -1.0), DomainError);

  const auto oa = fixtures::affine(0, 1, 0.0, 1.0);
  CHECK(link_cost(oa, 2.0) == 2.0);
  CHECK(link_cost_derivative(oa, 2.0) == 1.0);
  CHECK(link_cost_derivative(oa, 17.0) == 1.0);

  Link flat = l;
  flat.bpr_beta = 0.0;
  for (double f : {0.0, 1.0, 50.0}) CHECK(link_cost_derivative(flat, f) == 0.0);

  Link unit;
  unit.free_flow_time = 1.0;
  unit.capacity = 1.0;
  const double h = 1e-6;
  const double fd = (link_cost(unit, 1.0 + h) - link_cost(unit, 1.0 - h)) / (2 * h);
  CHECK(link_cost_derivative(unit, 1.0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fd == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("derivative matches central differences and cost is monotone") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Link l;
    l.free_flow_time = 0.5 + 20.0 * u(rng);
    l.capacity = 1.0 + 5000.0 * u(rng);
    l.bpr_alpha = 2.0 * u(rng);
    l.bpr_beta = 1.0 + 5.0 * u(rng);
    double prev = -1.0;
    for (int g = 1; g <= 40; ++g) {
      const double f = 2.0 * l.capacity * g / 40.0;
      const double h = 1e-5 * l.capacity;
      const double fd = (link_cost(l, f + h) - link_cost(l, f - h)) / (2 * h);
      const double an = link_cost_derivative(l, f);
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(1e-12, std::abs(an)) + 1e-9);
      const double c = link_cost(l, f);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("demand scaling") {
  const auto t = load_tntp_trips(fixtures::data_path("braess_trips.tntp"));
  const auto s = t.scaled(2.0);
  CHECK(s.total_demand == doctest::Approx(12.0));
  CHECK(s.max_demand() == 12.0);
  CHECK_THROWS_AS(t.scaled(0.0), DomainError);
}
