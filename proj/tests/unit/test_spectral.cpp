#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "eoscript/spectral.hpp"
#include "spectral_oracle.hpp"

using namespace eoscript;

namespace {

Raster make_raster(const std::vector<oracle::Pixel>& px, int width) {
  const int height = static_cast<int>(px.size()) / width;
  std::vector<BandPlane> bands(8, BandPlane(px.size()));
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto& p = px[i];
    const double v[8] = {p.red, p.green, p.blue, p.nir, p.swir1, p.swir2, p.nir900, p.nir970};
    for (int b = 0; b < 8; ++b) bands[b][i] = static_cast<float>(v[b]);
  }
  return Raster(width, height, canonical_band_names(), bands, GeoTransform{0, 10, 0, 0, 0, -10}, Crs::Epsg3857);
}

oracle::Pixel as_float_pixel(const oracle::Pixel& p) {
  auto f = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  return {f(p.red), f(p.green), f(p.blue), f(p.nir), f(p.swir1), f(p.swir2), f(p.nir900), f(p.nir970)};
}

float single(IndexKind kind, const oracle::Pixel& p) {
  const auto out = compute_index(kind, make_raster({p}, 1), kind == IndexKind::Ndsi ? BandMap{{"SWIR", "SWIR1"}} : BandMap{});
  return out.band(0)[0];
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("all nine indices agree with the scalar oracle on 1000 random pixels") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<oracle::Pixel> px(1000);
    for (auto& p : px) p = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const Raster r = make_raster(px, 40);
    for (auto kind : kAllIndexKinds) {
      const auto out = compute_index(kind, r, kind == IndexKind::Ndsi ? BandMap{{"SWIR", "SWIR1"}} : BandMap{});
      REQUIRE(out.band_count() == 1);
      CHECK(out.band_names()[0] == index_name(kind));
      double max_err = 0.0;
      for (std::size_t i = 0; i < px.size(); ++i) {
        const auto expected = oracle::index_value(index_name(kind), as_float_pixel(px[i]));
        REQUIRE(expected.has_value());
        max_err = std::max(max_err, std::fabs(static_cast<double>(out.band(0)[i]) - *expected) /
                                        std::max(1.0, std::fabs(*expected)));
      }
      INFO(index_name(kind));
      CHECK(max_err <= 1e-6);
    }
  }

  TEST_CASE("hand-evaluated values") {
    CHECK(single(IndexKind::Ndvi, {.red = 0.2, .nir = 0.6}) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(single(IndexKind::Savi, {.red = 0.2, .nir = 0.6}) == doctest::Approx(0.4 / 1.3 * 1.5).epsilon(1e-4));
    CHECK(single(IndexKind::Savi, {.red = 0.2, .nir = 0.6}) == doctest::Approx(0.4615).epsilon(1e-4));
    CHECK(single(IndexKind::Evi, {.red = 0.1, .blue = 0.05, .nir = 0.5}) == doctest::Approx(0.5797).epsilon(1e-4));
    CHECK(single(IndexKind::Ndvi, {.red = 0.5, .nir = 0.5}) == 0.0F);
    CHECK(single(IndexKind::Ndwi, {.green = 0.3, .nir = 0.3}) == 0.0F);
  }

  TEST_CASE("zero denominator yields nodata") {
    const auto out = compute_index(IndexKind::Ndvi, make_raster({oracle::Pixel{}}, 1));
    CHECK(out.nodata().has_value());
    CHECK(out.band(0)[0] == kDefaultIndexNodata);
  }

  TEST_CASE("input nodata propagates") {
    Raster r(1, 1, {"NIR", "RED"}, {{-1.0F}, {0.2F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326, -1.0F);
    const auto out = compute_index(IndexKind::Ndvi, r);
    CHECK(out.is_nodata(out.band(0)[0]));
  }

  TEST_CASE("NDSI needs an explicit SWIR mapping") {
    const Raster r = make_raster({{0.1, 0.5, 0.1, 0.3, 0.2, 0.2, 0.3, 0.3}}, 1);
    CHECK_THROWS_AS(compute_index(IndexKind::Ndsi, r), SpectralError);
    const auto out = compute_index(IndexKind::Ndsi, r, {{"SWIR", "SWIR2"}});
    CHECK(out.band(0)[0] == doctest::Approx((0.5 - 0.2) / 0.7).epsilon(1e-6));
  }

  TEST_CASE("missing band is reported") {
    Raster r(1, 1, {"RED"}, {{0.2F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    try {
      compute_index(IndexKind::Ndvi, r);
      FAIL("expected MissingBand");
    } catch (const SpectralError& e) {
      CHECK(e.code() == SpectralErrc::MissingBand);
    }
  }

  TEST_CASE("per-band rasters") {
    Raster nir(1, 1, {"B8"}, {{0.6F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    Raster red(1, 1, {"B4"}, {{0.2F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    const auto out = compute_index(IndexKind::Ndvi, {{"NIR", &nir}, {"RED", &red}});
    CHECK(out.band(0)[0] == doctest::Approx(0.5));
    Raster small(2, 1, {"B4"}, {{0.2F, 0.2F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    CHECK_THROWS_AS(compute_index(IndexKind::Ndvi, {{"NIR", &nir}, {"RED", &small}}), SpectralError);
  }

  TEST_CASE("scale invariance of ratio indices") {
    const oracle::Pixel p{0.11, 0.23, 0.05, 0.41, 0.17, 0.29, 0.37, 0.31};
    oracle::Pixel q = p;
    for (double* v : {&q.red, &q.green, &q.blue, &q.nir, &q.swir1, &q.swir2, &q.nir900, &q.nir970}) *v *= 4.0;
    for (auto kind : {IndexKind::Ndvi, IndexKind::Ndwi, IndexKind::Ndsi, IndexKind::Sr, IndexKind::Wbi,
                      IndexKind::Nwi1, IndexKind::Nwi2}) {
      CHECK(single(kind, p) == doctest::Approx(single(kind, q)).epsilon(1e-6));
    }
  }

  TEST_CASE("normalized differences stay within [-1, 1]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const oracle::Pixel p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
      for (auto kind : {IndexKind::Ndvi, IndexKind::Ndwi, IndexKind::Ndsi, IndexKind::Nwi1, IndexKind::Nwi2}) {
        const float v = single(kind, p);
        if (v == kDefaultIndexNodata) continue;
        CHECK(v >= -1.0F);
        CHECK(v <= 1.0F);
      }
    }
  }

  TEST_CASE("index listing") {
    const auto all = list_indices();
    CHECK(all.size() == 9);
    auto find = [&](const std::string& n) {
      return *std::find_if(all.begin(), all.end(), [&](const IndexInfo& i) { return i.name == n; });
    };
    CHECK(find("NDVI").required_bands == std::vector<std::string>{"NIR", "RED"});
    const auto wbi = find("WBI").required_bands;
    CHECK(std::set<std::string>(wbi.begin(), wbi.end()) == std::set<std::string>{"NIR900", "NIR970"});
    CHECK(find("EVI").parameter_defaults.at("L") == 1.0);
  }

  TEST_CASE("invalid parameters are rejected") {
    IndexParams p;
    p.epsilon = 0.0;
    CHECK_THROWS_AS(compute_index(IndexKind::Ndvi, make_raster({{0.1, 0.1, 0.1, 0.2}}, 1), {}, p), SpectralError);
  }
}
