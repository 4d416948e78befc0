#include "support.hpp"

using namespace riskmap;

TEST(Toml, ParsesSubset) {
  const auto doc = TomlDocument::parse(R"(
# comment
top = "x"   # trailing comment
[a]
s = "he said \"hi\" # not a comment"
i = 1_000
f = 0.15
b = true
arr = ["mon", "tue"]
[b.c]
neg = -3
)");
  EXPECT_EQ(doc.get_string("top"), "x");
  EXPECT_EQ(doc.get_string("a.s"), "he said \"hi\" # not a comment");
  EXPECT_EQ(doc.get_int("a.i"), 1000);
  EXPECT_EQ(doc.get_number("a.f"), 0.15);
  EXPECT_EQ(doc.get_number("a.i"), 1000.0);
  EXPECT_EQ(doc.get_bool("a.b"), true);
  EXPECT_EQ(doc.get_string_array("a.arr"), (std::vector<std::string>{"mon", "tue"}));
  EXPECT_EQ(doc.get_int("b.c.neg"), -3);
  EXPECT_FALSE(doc.get_string("missing"));
  EXPECT_THROW(doc.get_int("a.s"), ConfigError);
}

TEST(Toml, RejectsMalformedLines) {
  EXPECT_THROW(TomlDocument::parse("[unterminated\n"), ParseError);
  EXPECT_THROW(TomlDocument::parse("novalue\n"), ParseError);
  EXPECT_THROW(TomlDocument::parse("a = \n"), ParseError);
  EXPECT_THROW(TomlDocument::parse("a = 1\na = 2\n"), ParseError);
  EXPECT_THROW(TomlDocument::parse("a = \"open\n"), ParseError);
}

TEST(PipelineConfigFile, ResolvesPathsAndSettings) {
  const auto doc = TomlDocument::parse(R"(
[input]
cdr = "data/cdr-*.csv"
antennas = "/abs/antennas.csv"
zone = "zone.geojson"
[output]
dir = "out"
[ingest]
mode = "strict"
partitions = 4
[activity]
mu = 3
max = 900
[window]
start = "2011-11-01"
end = "2012-04-01"
[night]
start_hour = 21
end_hour = 5
days = ["sun", "mon"]
[heatmap]
preset = "mexico"
radius_k = 2.0
emit_viewer_bundle = true
)");
  const auto cfg = pipeline_config_from_toml(doc, "/cfg");
  EXPECT_EQ(cfg.cdr_glob, "/cfg/data/cdr-*.csv");
  EXPECT_EQ(cfg.antennas, fs::path("/abs/antennas.csv"));
  EXPECT_EQ(cfg.zone, fs::path("/cfg/zone.geojson"));
  EXPECT_EQ(cfg.output_dir, fs::path("/cfg/out"));
  EXPECT_EQ(cfg.ingest.mode, ParseMode::strict);
  EXPECT_EQ(cfg.ingest.partitions, 4u);
  EXPECT_EQ(cfg.activity.mu, 3u);
  EXPECT_EQ(cfg.activity.m_cap, 900u);
  ASSERT_TRUE(cfg.ingest.window);
  EXPECT_EQ(format_civil_date(cfg.ingest.window->end), "2012-04-01");
  EXPECT_EQ(cfg.night.start_hour, 21u);
  EXPECT_TRUE(cfg.night.night_days.contains(Weekday::sunday));
  EXPECT_FALSE(cfg.night.night_days.contains(Weekday::tuesday));
  EXPECT_EQ(cfg.preset, "mexico");
  EXPECT_EQ(cfg.filter, (FilterParams{0.5, 80}));
  EXPECT_EQ(cfg.radius_k, 2.0);
  EXPECT_TRUE(cfg.emit_viewer_bundle);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(PipelineConfigFile, DefaultsToNationalRegime) {
  const auto cfg = pipeline_config_from_toml(TomlDocument::parse(""), ".");
  EXPECT_EQ(cfg.filter, (FilterParams{0.15, 50}));
  EXPECT_EQ(cfg.activity.mu, 5u);
  EXPECT_EQ(cfg.activity.m_cap, 400u);
  EXPECT_EQ(cfg.night.start_hour, 20u);
  EXPECT_EQ(cfg.night.end_hour, 6u);
  EXPECT_THROW(cfg.validate(), ConfigError);  // inputs missing
}

TEST(PipelineConfigFile, ExplicitParamsOverridePreset) {
  const auto cfg = pipeline_config_from_toml(
      TomlDocument::parse("[heatmap]\npreset = \"amba\"\nmin_volume = 10\n"), ".");
  EXPECT_EQ(cfg.filter, (FilterParams{0.02, 10}));
  EXPECT_FALSE(cfg.preset);
}

TEST(PipelineConfigFile, Rejections) {
  auto load = [](const char* text) { return pipeline_config_from_toml(TomlDocument::parse(text), "."); };
  EXPECT_THROW(load("[input]\ncdrs = \"x\"\n"), ConfigError);
  EXPECT_THROW(load("[heatmap]\npreset = \"nowhere\"\n"), ConfigError);
  EXPECT_THROW(load("[ingest]\nmode = \"sloppy\"\n"), ConfigError);
  EXPECT_THROW(load("[window]\nstart = \"2011-11-01\"\n"), ConfigError);
  EXPECT_THROW(load("[window]\nstart = \"2011-11-01\"\nend = \"2011-02-30\"\n"), ConfigError);
  EXPECT_THROW(load("[night]\ndays = [\"someday\"]\n"), ConfigError);
  EXPECT_THROW(load("[activity]\nmu = -1\n"), ConfigError);
  EXPECT_THROW(load("[activity]\nmu = \"five\"\n"), ConfigError);
}

TEST(PipelineConfigFile, ValidateCatchesBadRanges) {
  PipelineConfig cfg;
  cfg.cdr_glob = "x";
  cfg.antennas = "a";
  cfg.zone = "z";
  EXPECT_NO_THROW(cfg.validate());
  cfg.ingest.window = ObservationWindow{{2011, 12, 1}, {2011, 11, 1}};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.ingest.window.reset();
  cfg.activity = {500, 400};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.activity = {};
  cfg.filter.beta = 2;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(PipelineConfigFile, MissingFileIsConfigError) {
  EXPECT_THROW(load_pipeline_config("/nonexistent/riskmap.toml"), ConfigError);
}

TEST(ShippedConfigs, AllParse) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(RISKMAP_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".toml") continue;
    ++n;
    EXPECT_NO_THROW(load_pipeline_config(e.path()).validate()) << e.path();
  }
  EXPECT_GE(n, 4u);
}
