#include <set>

#include "support.hpp"

using namespace riskmap;

namespace {

AntennaIndicators row(std::uint32_t id, std::uint64_t n, std::uint64_t v) {
  return {AntennaId{id}, n, v, 0, 0};
}

std::set<std::uint32_t> ids(const std::vector<AntennaIndicators>& rows) {
  std::set<std::uint32_t> out;
  for (const auto& r : rows) out.insert(r.antenna.value);
  return out;
}

std::vector<AntennaIndicators> random_rows(std::uint32_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<AntennaIndicators> rows;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint64_t pop = rng() % 150;
    rows.push_back(row(i, pop, pop ? rng() % (pop + 1) : 0));
  }
  return rows;
}

}  // namespace

TEST(Filter, PresetValues) {
  EXPECT_EQ(*find_preset("argentina-national"), (FilterParams{0.15, 50}));
  EXPECT_EQ(*find_preset("argentina-broad"), (FilterParams{0.01, 50}));
  EXPECT_EQ(find_preset("amba")->beta, 0.02);
  EXPECT_EQ(*find_preset("mexico"), (FilterParams{0.50, 80}));
  EXPECT_FALSE(find_preset("atlantis"));
}

TEST(Filter, StrictInequalities) {
  const FilterParams national{0.15, 50};
  EXPECT_TRUE(passes_filter(row(0, 60, 12), national));    // 0.2
  EXPECT_FALSE(passes_filter(row(0, 50, 50), national));   // N = m_v
  EXPECT_FALSE(passes_filter(row(0, 100, 15), national));  // fraction = beta
  EXPECT_TRUE(passes_filter(row(0, 100, 16), national));
  EXPECT_FALSE(passes_filter(row(0, 0, 0), {0.0, 0}));     // undefined fraction
  EXPECT_FALSE(passes_filter(row(0, 5, 0), {0.0, 0}));     // 0 is not > 0
}

TEST(Filter, InclusionChainsOverPaperGrid) {
  const auto rows = random_rows(400, 11);
  const double betas[] = {0.0, 0.01, 0.02, 0.15, 0.5};
  const std::uint64_t volumes[] = {0, 50, 80};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const auto kept = ids(filter_antennas(rows, {betas[i], volumes[j]}));
      if (i + 1 < 5) {
        const auto tighter = ids(filter_antennas(rows, {betas[i + 1], volumes[j]}));
        EXPECT_TRUE(std::includes(kept.begin(), kept.end(), tighter.begin(), tighter.end()));
      }
      if (j + 1 < 3) {
        const auto tighter = ids(filter_antennas(rows, {betas[i], volumes[j + 1]}));
        EXPECT_TRUE(std::includes(kept.begin(), kept.end(), tighter.begin(), tighter.end()));
      }
    }
}

TEST(Filter, Idempotent) {
  const auto rows = random_rows(300, 12);
  const FilterParams p{0.15, 50};
  const auto once = filter_antennas(rows, p);
  EXPECT_EQ(filter_antennas(once, p), once);
}

TEST(Filter, RejectsBadParams) {
  EXPECT_THROW((FilterParams{-0.1, 0}.validate()), ConfigError);
  EXPECT_THROW((FilterParams{1.5, 0}.validate()), ConfigError);
}

TEST(Circles, SqrtAreaLaw) {
  const auto reg = rt::registry_of({{"A", {0, 0}}, {"B", {1, 1}}});
  const std::vector<AntennaIndicators> kept{row(0, 100, 10), row(1, 400, 400)};
  const auto c = build_circles(kept, reg, 2.5);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_DOUBLE_EQ(c[1].radius_scale / c[0].radius_scale, 2.0);
  EXPECT_DOUBLE_EQ(c[0].radius_scale, 25.0);
  EXPECT_DOUBLE_EQ(c[1].intensity, 1.0);
  EXPECT_DOUBLE_EQ(c[0].intensity, 0.1);
  EXPECT_THROW(build_circles(kept, reg, 0.0), ConfigError);
}

TEST(Circles, RecomputedFieldsMatch) {
  SynthConfig sc;
  sc.n_users = 400;
  sc.n_antennas = 20;
  const auto ds = generate(sc);
  std::vector<AntennaIndicators> rows;
  for (std::uint32_t a = 0; a < 20; ++a) rows.push_back(row(a, 10 + a * 7, a * 3));
  const double k = 0.75;
  const auto circles = build_circles(rows, ds.registry, k);
  ASSERT_EQ(circles.size(), 20u);
  // recompute from the CSV text alone
  for (const auto& line : oracle::lines_of(export_layer(circles, LayerFormat::csv))) {
    const auto f = oracle::split(line, ',');
    ASSERT_EQ(f.size(), 7u);
    const auto id = ds.registry.find(f[0]);
    ASSERT_TRUE(id);
    const double n = std::stod(f[3]), v = std::stod(f[4]);
    EXPECT_EQ(std::stod(f[1]), ds.registry.location(*id).lat);
    EXPECT_EQ(std::stod(f[2]), ds.registry.location(*id).lon);
    EXPECT_NEAR(std::stod(f[5]), v / n, 1e-12);
    EXPECT_NEAR(std::stod(f[6]), k * std::sqrt(n), 1e-12);
  }
  for (std::size_t i = 0; i < circles.size(); ++i)
    for (std::size_t j = 0; j < circles.size(); ++j) {
      const double lhs = circles[i].radius_scale * circles[i].radius_scale /
                         (circles[j].radius_scale * circles[j].radius_scale);
      const double rhs = static_cast<double>(circles[i].population) / circles[j].population;
      EXPECT_NEAR(lhs / rhs, 1.0, 1e-9);
    }
}

TEST(Layer, EmptyIsValidFeatureCollection) {
  const auto doc = nlohmann::json::parse(export_layer({}, LayerFormat::geojson));
  EXPECT_EQ(doc["type"], "FeatureCollection");
  EXPECT_TRUE(doc["features"].is_array());
  EXPECT_TRUE(doc["features"].empty());
  EXPECT_EQ(export_layer({}, LayerFormat::csv), "");
}

TEST(Layer, GeoJsonStructure) {
  const auto reg = rt::registry_of({{"B", {-27.5, -59.25}}, {"A", {-30, -60}}});
  const std::vector<AntennaIndicators> kept{row(0, 100, 20), row(1, 64, 32)};
  const auto doc = nlohmann::json::parse(export_layer(build_circles(kept, reg), LayerFormat::geojson));
  ASSERT_EQ(doc["features"].size(), 2u);
  const auto& f = doc["features"][1];
  EXPECT_EQ(f["type"], "Feature");
  EXPECT_EQ(f["geometry"]["type"], "Point");
  EXPECT_EQ(f["geometry"]["coordinates"][0], -59.25);  // [lon, lat]
  EXPECT_EQ(f["geometry"]["coordinates"][1], -27.5);
  const auto& p = f["properties"];
  EXPECT_EQ(p["antenna_id"], "B");
  EXPECT_EQ(p["population"], 64);
  EXPECT_EQ(p["vulnerable"], 32);
  EXPECT_EQ(p["intensity"], 0.5);
  EXPECT_EQ(p["radius_scale"], 8.0);
  EXPECT_EQ(doc["features"][0]["properties"]["antenna_id"], "A");
}

TEST(Layer, ByteDeterministic) {
  SynthConfig sc;
  sc.n_users = 100;
  sc.n_antennas = 30;
  const auto ds = generate(sc);
  const auto rows = random_rows(30, 4);
  const auto kept = filter_antennas(rows, {0.0, 0});
  auto circles = build_circles(kept, ds.registry);
  const auto a = export_layer(circles, LayerFormat::geojson);
  std::reverse(circles.begin(), circles.end());
  EXPECT_EQ(export_layer(circles, LayerFormat::geojson), a);
  EXPECT_EQ(export_layer(build_circles(kept, ds.registry), LayerFormat::geojson), a);
}
