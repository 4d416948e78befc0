#include <set>

#include "support.hpp"

using namespace riskmap;

namespace {

// Zone: lat -30..-20, lon -65..-55. E1 inside, B2 and C3 outside.
EndemicZone zone() {
  Ring r{{{-30, -65}, {-30, -55}, {-20, -55}, {-20, -65}, {-30, -65}}};
  return EndemicZone::from_rings("zone", {r});
}

AntennaRegistry registry() {
  return rt::registry_of({{"E1", {-25, -60}}, {"B2", {-35, -60}}, {"C3", {-35, -50}}});
}

// Monday 2011-11-07; 22:00 is a weekday night, 12:00 is not.
const char* kHandBuilt =
    "r1,x1,2011-11-07T22:00:00-03:00,out,E1\n"
    "r2,r1,2011-11-07T22:00:00-03:00,out,E1\n"
    "x1,y1,2011-11-07T22:00:00-03:00,out,B2\n"
    "x2,x1,2011-11-07T22:00:00-03:00,out,B2\n"
    "y1,x2,2011-11-07T22:00:00-03:00,out,C3\n"
    "x1,r1,2011-11-07T12:00:00-03:00,out,C3\n"
    "x1,x2,2011-11-07T12:00:00-03:00,out,B2\n"
    "y1,x2,2011-11-07T12:00:00-03:00,out,C3\n"
    "z,r2,2011-11-07T12:00:00-03:00,out,C3\n"
    "z,x1,2011-11-07T12:00:00-03:00,out,B2\n"
    "x2,z,2011-11-07T12:00:00-03:00,out,E1\n"
    "r1,z,2011-11-07T12:00:00-03:00,out,B2\n"
    "y1,x1,2011-11-07T12:00:00-03:00,out,C3\n"
    "x2,y1,2011-11-07T12:00:00-03:00,out,C3\n"
    "x2,y1,2011-11-07T12:00:00-03:00,out,E1\n"
    "x1,r1,2011-11-07T22:00:00-03:00,in,E1\n"
    "y1,x2,2011-11-07T12:00:00-03:00,in,B2\n"
    "x1,y1,2011-11-07T12:00:00-03:00,in,C3\n"
    "z,r1,2011-11-07T12:00:00-03:00,in,B2\n"
    "y1,x2,2011-11-07T12:00:00-03:00,in,E1\n";

struct Run {
  CdrBatch batch;
  UserSet clients;
  SocialGraph graph;
  HomeMap homes;
  UserSet residents, vulnerable;
  std::vector<AntennaIndicators> rows;
};

Run run_all(const std::string& text, const AntennaRegistry& reg, const EndemicZone& z,
            unsigned partitions = 1) {
  Run r;
  r.batch = parse_cdr_stream(text, reg);
  r.clients = UserSet(r.batch.users.size());
  for (std::uint32_t i = 0; i < r.batch.users.size(); ++i) r.clients.insert(UserId{i});
  r.graph = build_graph(r.batch.records, r.clients);
  r.homes = detect_homes(r.batch.records, r.clients, r.batch.users.size());
  r.residents = residents_of_zone(r.homes, reg, z);
  r.vulnerable = tag_vulnerable(r.graph, r.residents);
  r.rows = compute_indicators(r.batch.records, r.homes, r.residents, r.vulnerable, reg, partitions);
  return r;
}

std::set<std::string> names(const UserSet& s, const UserTable& t) {
  std::set<std::string> out;
  for (UserId u : s.members()) out.insert(t.name(u));
  return out;
}

}  // namespace

TEST(Risk, HandBuiltScenario) {
  const auto reg = registry();
  const auto r = run_all(kHandBuilt, reg, zone());
  EXPECT_EQ(names(r.residents, r.batch.users), (std::set<std::string>{"r1", "r2"}));
  EXPECT_EQ(names(r.vulnerable, r.batch.users), (std::set<std::string>{"r1", "r2", "x1", "z"}));
  EXPECT_EQ(export_indicators_csv(r.rows, reg),
            "B2,2,1,5,0\n"
            "C3,1,0,6,2\n"
            "E1,2,2,4,1\n");
}

TEST(Risk, HandBuiltScenarioMatchesRecount) {
  const auto reg = registry();
  const auto r = run_all(kHandBuilt, reg, zone());
  const auto calls = oracle::raw_calls(kHandBuilt);
  std::set<std::string> all;
  for (const auto& n : r.batch.users.names()) all.insert(n);
  std::map<std::string, std::string> home_of;
  for (const auto& [u, h] : oracle::homes(calls, all)) home_of[u] = h.antenna;
  const auto expected = oracle::indicators(calls, home_of, names(r.residents, r.batch.users),
                                           names(r.vulnerable, r.batch.users), {"B2", "C3", "E1"});
  for (const auto& a : r.rows) {
    const auto& e = expected.at(reg.name(a.antenna));
    EXPECT_EQ((std::array<std::uint64_t, 4>{a.n_residents, a.n_vulnerable, a.calls_out,
                                            a.vulnerable_calls}),
              e);
  }
}

TEST(Risk, EmptyInputsGiveZeroRows) {
  const auto reg = registry();
  const auto r = run_all("", reg, zone());
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& a : r.rows) EXPECT_EQ(a, (AntennaIndicators{a.antenna, 0, 0, 0, 0}));
}

TEST(Risk, VulnerableFractionSurvivesMexicoFilter) {
  const AntennaIndicators a{AntennaId{0}, 100, 60, 500, 300};
  EXPECT_DOUBLE_EQ(a.vulnerable_fraction(), 0.6);
  EXPECT_TRUE(passes_filter(a, *find_preset("mexico")));
  EXPECT_TRUE(passes_filter(a, {0.5, 50}));
}

TEST(Risk, NoResidentsMeansNoVulnerable) {
  SocialGraph g;
  EXPECT_TRUE(tag_vulnerable(g, UserSet(10)).empty());
}

TEST(Risk, ResidentNeighborsTagged) {
  const auto imported = import_edge_list("r,x\nr,y\nq,w\n");
  UserSet residents(imported.users.size());
  residents.insert(*imported.users.find("r"));
  EXPECT_EQ(names(tag_vulnerable(imported.graph, residents), imported.users),
            (std::set<std::string>{"x", "y"}));
}

TEST(Risk, TagVulnerableMatchesBruteForceOnRandomGraphs) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 199);
    const int m = static_cast<int>(rng() % (3 * n));
    std::string text;
    oracle::Adjacency adj;
    for (int e = 0; e < m; ++e) {
      const int a = rng() % n, b = rng() % n;
      if (a == b) continue;
      const std::string x = "n" + std::to_string(a), y = "n" + std::to_string(b);
      text += x + "," + y + "\n";
      adj[x].insert(y);
      adj[y].insert(x);
    }
    if (text.empty()) continue;
    const auto g = import_edge_list(text);
    UserSet residents(g.users.size());
    std::set<std::string> res_names;
    for (std::uint32_t i = 0; i < g.users.size(); ++i)
      if (rng() % 10 == 0) {
        residents.insert(UserId{i});
        res_names.insert(g.users.name(UserId{i}));
      }
    EXPECT_EQ(names(tag_vulnerable(g.graph, residents), g.users), oracle::vulnerable(adj, res_names))
        << "trial " << trial;
  }
}

TEST(Risk, TaggingMonotoneInResidents) {
  const auto g = import_edge_list("a,b\nb,c\nc,d\nd,e\ne,a\nf,g\n");
  UserSet residents(g.users.size());
  UserSet prev(g.users.size());
  for (std::uint32_t i = 0; i < g.users.size(); ++i) {
    residents.insert(UserId{i});
    const UserSet now = tag_vulnerable(g.graph, residents);
    for (UserId u : prev.members()) EXPECT_TRUE(now.contains(u));
    prev = now;
  }
}

TEST(Risk, ConservationOnSyntheticFixture) {
  SynthConfig sc;
  sc.n_users = 600;
  sc.n_antennas = 50;
  const auto ds = generate(sc);
  const auto r = run_all(export_cdr(ds.records, ds.users, ds.registry), ds.registry, sc.endemic_zone);
  std::uint64_t n = 0, v = 0, c = 0;
  for (const auto& a : r.rows) {
    EXPECT_LE(a.n_vulnerable, a.n_residents);
    EXPECT_LE(a.vulnerable_calls, a.calls_out);
    n += a.n_residents;
    v += a.n_vulnerable;
    c += a.calls_out;
  }
  std::uint64_t outgoing = 0, homed_vulnerable = 0;
  for (const auto& rec : r.batch.records) outgoing += rec.direction == Direction::outgoing;
  for (UserId u : r.vulnerable.members()) homed_vulnerable += r.homes.find(u) != nullptr;
  EXPECT_EQ(n, r.homes.size());
  EXPECT_EQ(v, homed_vulnerable);
  EXPECT_EQ(c, outgoing);
}

TEST(Risk, ResidentsMatchManifest) {
  SynthConfig sc;
  sc.n_users = 500;
  sc.n_antennas = 40;
  const auto ds = generate(sc);
  const auto r = run_all(export_cdr(ds.records, ds.users, ds.registry), ds.registry, sc.endemic_zone);
  std::set<std::string> expected;
  for (std::uint32_t u = 0; u < ds.users.size(); ++u)
    if (ds.manifest.users[u].endemic) expected.insert(ds.users.name(UserId{u}));
  EXPECT_EQ(names(r.residents, r.batch.users), expected);
}

TEST(Risk, NoEndemicUsersNoResidents) {
  SynthConfig sc;
  sc.n_users = 200;
  sc.n_antennas = 20;
  sc.endemic_fraction = 0;
  const auto ds = generate(sc);
  const auto r = run_all(export_cdr(ds.records, ds.users, ds.registry), ds.registry, sc.endemic_zone);
  EXPECT_TRUE(r.residents.empty());
  EXPECT_TRUE(r.vulnerable.empty());
}

TEST(Risk, PartitionInvariant) {
  SynthConfig sc;
  sc.n_users = 300;
  sc.n_antennas = 30;
  const auto ds = generate(sc);
  const std::string text = export_cdr(ds.records, ds.users, ds.registry);
  const auto ref = run_all(text, ds.registry, sc.endemic_zone, 1).rows;
  for (unsigned p : {2u, 8u}) EXPECT_EQ(run_all(text, ds.registry, sc.endemic_zone, p).rows, ref);
}

TEST(Risk, UnknownHomeAntennaIsConsistencyError) {
  const auto reg = registry();
  HomeMap homes(1, {HomeAssignment{UserId{0}, AntennaId{99}, 1, 1}});
  EXPECT_THROW(residents_of_zone(homes, reg, zone()), ConsistencyError);
}

TEST(Risk, IndicatorExportsRoundTrip) {
  const auto reg = registry();
  const auto r = run_all(kHandBuilt, reg, zone());
  const auto csv = export_indicators_csv(r.rows, reg);
  EXPECT_EQ(import_indicators_csv(csv, reg), r.rows);
  const auto loaded = import_indicators_json(export_indicators_json(r.rows, reg));
  EXPECT_EQ(export_indicators_csv(loaded.rows, loaded.registry), csv);
  EXPECT_THROW(import_indicators_csv("E1,1,2,0,0\n", reg), ParseError);
}
