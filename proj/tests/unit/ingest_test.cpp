#include <zlib.h>

#include <set>

#include "support.hpp"

using namespace riskmap;

namespace {

AntennaRegistry small_registry() {
  return rt::registry_of({{"A1", {-27.45, -58.98}}, {"A17", {-26.0, -60.0}}, {"B2", {-34.6, -58.4}}});
}

std::set<std::string> names(const UserSet& s, const UserTable& t) {
  std::set<std::string> out;
  for (UserId u : s.members()) out.insert(t.name(u));
  return out;
}

}  // namespace

TEST(Ingest, MapsFieldsDirectly) {
  const auto reg = small_registry();
  const auto b = parse_cdr_stream("u1,u2,2011-11-07T21:15:00-03:00,out,A17\n", reg);
  ASSERT_EQ(b.records.size(), 1u);
  const CallRecord& r = b.records[0];
  EXPECT_EQ(b.users.name(r.caller), "u1");
  EXPECT_EQ(b.users.name(r.callee), "u2");
  EXPECT_EQ(format_timestamp(r.time), "2011-11-07T21:15:00-03:00");
  EXPECT_EQ(r.direction, Direction::outgoing);
  EXPECT_EQ(reg.name(r.antenna), "A17");
  EXPECT_EQ(b.report.records_read, 1u);
  EXPECT_EQ(b.report.records_dropped(), 0u);
}

TEST(Ingest, DropsSelfCalls) {
  const auto reg = small_registry();
  const auto b = parse_cdr_stream("u1,u1,2011-11-07T21:15:00-03:00,out,A17\n", reg);
  EXPECT_TRUE(b.records.empty());
  EXPECT_EQ(b.report.records_dropped_selfcall, 1u);
  EXPECT_EQ(b.report.records_read, 1u);
}

TEST(Ingest, LenientCountsMalformedAgainstRegexValidator) {
  const auto reg = small_registry();
  std::mt19937 rng(42);
  std::vector<std::string> lines;
  const char* antennas[] = {"A1", "A17", "B2"};
  for (int i = 0; i < 997; ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "u%d,v%d,2011-11-%02dT%02d:%02d:%02d-03:00,%s,%s",
                  int(rng() % 50), int(rng() % 50), int(1 + rng() % 30), int(rng() % 24),
                  int(rng() % 60), int(rng() % 60), rng() % 2 ? "in" : "out", antennas[rng() % 3]);
    lines.push_back(buf);
  }
  const std::string bad[] = {"u1,u2,2011-11-31T10:00:00-03:00,out,A1", "u1,u2,out,A1",
                             "u1,u2,2011-11-07T10:00:00-03:00,both,A1"};
  for (const auto& b : bad) lines.insert(lines.begin() + rng() % lines.size(), b);
  std::string text;
  for (const auto& l : lines) text += l + "\n";

  std::size_t oracle_bad = 0, oracle_self = 0;
  for (const auto& l : oracle::lines_of(text)) {
    if (!oracle::line_well_formed(l)) {
      ++oracle_bad;
    } else {
      const auto f = oracle::split(l, ',');
      oracle_self += f[0] == f[1];
    }
  }
  ASSERT_EQ(oracle_bad, 3u);

  const auto batch = parse_cdr_stream(text, reg);
  EXPECT_EQ(batch.report.records_read, 1000u);
  EXPECT_EQ(batch.report.records_dropped_malformed, 3u);
  EXPECT_EQ(batch.report.records_dropped_selfcall, oracle_self);
  EXPECT_EQ(batch.records.size(), 997u - oracle_self);
  EXPECT_EQ(batch.report.records_read, batch.records.size() + batch.report.records_dropped());
}

TEST(Ingest, StrictFailsWithLineNumber) {
  const auto reg = small_registry();
  std::string text;
  for (int i = 0; i < 40; ++i) text += "u1,u2,2011-11-07T21:15:00-03:00,out,A1\n";
  text += "u1,u2,2011-11-07T21:15:00-03:00,sideways,A1\n";
  text += "u1,u2,2011-11-07T21:15:00-03:00,out,A1\n";
  for (unsigned parts : {1u, 3u, 8u}) {
    IngestOptions opts;
    opts.mode = ParseMode::strict;
    opts.partitions = parts;
    try {
      parse_cdr_stream(text, reg, opts, "calls.csv");
      FAIL() << "strict mode accepted a malformed line";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 41u) << parts;
      EXPECT_EQ(e.source(), "calls.csv");
    }
  }
}

TEST(Ingest, UnknownAntennaDroppedOrFatal) {
  const auto reg = small_registry();
  const std::string text = "u1,u2,2011-11-07T21:15:00-03:00,out,ZZ9\nu1,u2,2011-11-07T21:15:00-03:00,out,A1\n";
  const auto b = parse_cdr_stream(text, reg);
  EXPECT_EQ(b.records.size(), 1u);
  EXPECT_EQ(b.report.records_dropped_unknown_antenna, 1u);
  IngestOptions strict;
  strict.mode = ParseMode::strict;
  EXPECT_THROW(parse_cdr_stream(text, reg, strict), ParseError);
}

TEST(Ingest, ToleratesCrlfAndBlankLines) {
  const auto reg = small_registry();
  const auto b = parse_cdr_stream(
      "u1,u2,2011-11-07T21:15:00-03:00,out,A1\r\n\r\nu2,u1,2011-11-07T21:16:00-03:00,in,B2\r\n", reg);
  EXPECT_EQ(b.records.size(), 2u);
  EXPECT_EQ(b.report.records_dropped_malformed, 0u);
}

TEST(Ingest, KeepsDuplicateRecords) {
  const auto reg = small_registry();
  const std::string line = "u1,u2,2011-11-07T21:15:00-03:00,out,A1\n";
  EXPECT_EQ(parse_cdr_stream(line + line, reg).records.size(), 2u);
}

TEST(Ingest, ObservationWindowDropsOutsideDates) {
  const auto reg = small_registry();
  IngestOptions opts;
  opts.window = ObservationWindow{{2011, 11, 1}, {2011, 12, 1}};
  const auto b = parse_cdr_stream(
      "u1,u2,2011-10-31T23:59:59-03:00,out,A1\n"
      "u1,u2,2011-11-01T00:00:00-03:00,out,A1\n"
      "u1,u2,2011-11-30T23:59:59-03:00,out,A1\n"
      "u1,u2,2011-12-01T00:00:00-03:00,out,A1\n",
      reg, opts);
  EXPECT_EQ(b.records.size(), 2u);
  EXPECT_EQ(b.report.records_dropped_out_of_window, 2u);
}

TEST(Ingest, PartitionCountDoesNotChangeOutput) {
  SynthConfig sc;
  sc.n_users = 300;
  sc.n_antennas = 30;
  const auto ds = generate(sc);
  const std::string text = export_cdr(ds.records, ds.users, ds.registry) + "garbage\n";
  IngestOptions one;
  const auto ref = parse_cdr_stream(text, ds.registry, one);
  for (unsigned p : {2u, 3u, 8u, 64u}) {
    IngestOptions opts;
    opts.partitions = p;
    const auto b = parse_cdr_stream(text, ds.registry, opts);
    EXPECT_EQ(b.records, ref.records) << p;
    EXPECT_EQ(b.report, ref.report) << p;
    EXPECT_TRUE(std::equal(b.users.names().begin(), b.users.names().end(),
                           ref.users.names().begin(), ref.users.names().end()));
  }
}

TEST(Ingest, ReadsGzipAndSplitFiles) {
  rt::TempDir dir;
  const auto reg = small_registry();
  const std::string a = "u1,u2,2011-11-07T21:15:00-03:00,out,A1\n";
  const std::string b = "u3,u2,2011-11-08T21:15:00-03:00,in,B2\n";
  write_text_file(dir / "a.csv", a);
  gzFile gz = gzopen((dir / "b.csv.gz").c_str(), "wb");
  ASSERT_NE(gz, nullptr);
  gzwrite(gz, b.data(), static_cast<unsigned>(b.size()));
  gzclose(gz);
  const auto files = expand_glob((dir.path() / "*.csv*").string());
  ASSERT_EQ(files.size(), 2u);
  const auto batch = parse_cdr_files(files, reg);
  const auto whole = parse_cdr_stream(a + b, reg);
  EXPECT_EQ(batch.records, whole.records);
}

TEST(Ingest, MissingFileIsFatal) {
  const auto reg = small_registry();
  const fs::path p = "/nonexistent/riskmap/cdr.csv";
  EXPECT_THROW(parse_cdr_files(std::span{&p, 1}, reg), IoError);
}

TEST(Ingest, ReportSerializations) {
  IngestReport r;
  r.records_read = 10;
  r.records_dropped_malformed = 2;
  r.users_seen = 4;
  EXPECT_NE(r.to_key_value().find("records_read=10\n"), std::string::npos);
  EXPECT_NE(r.to_key_value().find("records_dropped_malformed=2\n"), std::string::npos);
  EXPECT_EQ(r.to_json()["users_seen"], 4);
}

TEST(Antennas, ParsesEntry) {
  const auto reg = load_antennas("A1,-27.45,-58.98\n", "ant.csv");
  ASSERT_EQ(reg.size(), 1u);
  const auto id = reg.find("A1");
  ASSERT_TRUE(id);
  EXPECT_EQ(reg.location(*id), (GeoPoint{-27.45, -58.98}));
}

TEST(Antennas, DuplicateIdNamed) {
  try {
    load_antennas("A1,-27.45,-58.98\nB1,0,0\nA1,-27.0,-58.0\n", "ant.csv");
    FAIL() << "duplicate accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string{e.what()}.find("A1"), std::string::npos) << e.what();
  }
}

TEST(Antennas, RejectsOutOfRangeAndMalformed) {
  EXPECT_THROW(load_antennas("A1,91,0\n"), ParseError);
  EXPECT_THROW(load_antennas("A1,0,-180.5\n"), ParseError);
  EXPECT_THROW(load_antennas("A1,abc,0\n"), ParseError);
  EXPECT_THROW(load_antennas("A1,0\n"), ParseError);
  EXPECT_NO_THROW(load_antennas("A1,90,-180\nA2,-90,180\n"));
}

TEST(Antennas, SyntheticFileMatchesManifest) {
  SynthConfig sc;
  sc.n_users = 200;
  sc.n_antennas = 200;
  const auto ds = generate(sc);
  const auto reg = load_antennas(export_antennas(ds.registry), "antennas.csv");
  ASSERT_EQ(reg.size(), 200u);
  for (std::uint32_t i = 0; i < 200; i += 7) {
    const AntennaId id{i};
    const auto found = reg.find(ds.registry.name(id));
    ASSERT_TRUE(found);
    EXPECT_EQ(reg.location(*found), ds.registry.location(id));
  }
  // the manifest's per-antenna tables cover exactly the registry
  const auto manifest = nlohmann::json::parse(manifest_to_json(ds));
  EXPECT_EQ(manifest["antennas"].size(), 200u);
}

TEST(Activity, InclusiveBoundsAgainstRecount) {
  const auto reg = small_registry();
  // per user, per month (Nov, Dec) participation counts; partners are
  // one-off users so these counts are exact
  const std::array<std::array<int, 2>, 12> counts{{{5, 5}, {4, 10}, {400, 6}, {401, 50},
                                                   {5, 0}, {0, 7}, {6, 3}, {399, 400},
                                                   {1, 1}, {10, 402}, {200, 200}, {0, 5}}};
  std::string text;
  int partner = 0;
  for (int u = 0; u < 12; ++u)
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < counts[u][m]; ++k) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "user%02d,p%06d,2011-%s-%02dT12:00:00-03:00,out,A1\n", u,
                      partner++, m == 0 ? "11" : "12", 1 + k % 28);
        text += buf;
      }
  const auto batch = parse_cdr_stream(text, reg);
  const auto kept = names(filter_users_by_activity(batch.records, batch.users.size(), {5, 400}),
                          batch.users);
  const std::set<std::string> expected{"user00", "user02", "user04", "user05",
                                       "user07", "user10", "user11"};
  EXPECT_EQ(kept, expected);
  EXPECT_EQ(kept, oracle::kept_users(oracle::raw_calls(text), 5, 400));
}

TEST(Activity, RelaxingBoundsNeverRemovesUsers) {
  SynthConfig sc;
  sc.n_users = 200;
  sc.n_antennas = 20;
  sc.calls_per_user_day = 0.4;
  const auto ds = generate(sc);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> bounds{{20, 40}, {10, 40}, {10, 80}, {0, 1000}};
  UserSet prev(ds.users.size());
  for (const auto& [mu, m] : bounds) {
    const UserSet kept = filter_users_by_activity(ds.records, ds.users.size(), {mu, m});
    for (UserId u : prev.members()) EXPECT_TRUE(kept.contains(u));
    prev = kept;
  }
  EXPECT_EQ(prev.size(), ds.users.size());
}

TEST(Activity, EmptyInputYieldsEmptySet) {
  EXPECT_TRUE(filter_users_by_activity({}, 0, {}).empty());
}

TEST(Activity, RejectsMuAboveCap) {
  EXPECT_THROW((ActivityFilterConfig{10, 5}.validate()), ConfigError);
}
