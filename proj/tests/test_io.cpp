#include <gtest/gtest.h>

#include <sstream>

#include "generators.hpp"
#include "lmconv/error.hpp"
#include "lmconv/io.hpp"
#include "lmconv/models.hpp"

using namespace lmconv;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidPath;
}

}  // namespace

TEST(ModelJson, EveryPresetRoundTrips) {
    for (const auto& id : preset_ids()) {
        const Json j = model_to_json(preset(id));
        EXPECT_EQ(model_to_json(model_from_json(j)).dump(), j.dump()) << id;
    }
}

TEST(ModelJson, PresetReferencesTakeOverrides) {
    const ModelSpec m = model_from_json(Json::parse(R"({"preset": "ex-6.2-6", "horizon": 50})"));
    EXPECT_EQ(m.preset_id, "ex-6.2-6");
    EXPECT_DOUBLE_EQ(m.horizon, 50.0);
}

TEST(ModelJson, UnknownFieldsAreConfigErrors) {
    EXPECT_EQ(code_of([] { model_from_json(Json::parse(R"({"preset": "bm", "colour": 1})")); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { model_from_json(Json::parse(R"({"kind": "GridDiffusion", "horizon": "long"})")); }),
              ErrorCode::ConfigError);
}

TEST(PathJson, RoundTripsRandomPaths) {
    gen::for_all(200, 51, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.diffusion = r.chance(0.5);
        const CadlagPath p = gen::path(r, shape);
        const Json j = path_to_json(p);
        const CadlagPath back = path_from_json(j);
        EXPECT_EQ(path_to_json(back).dump(), j.dump());
        EXPECT_DOUBLE_EQ(value_at(back, p.horizon()), value_at(p, p.horizon()));
    });
}

TEST(PathJson, KeepsAbsorptionAndExplosion) {
    const CadlagPath a = PathBuilder(3.0).add_jump(1.0, -1.0).set_absorption(1.0).build();
    EXPECT_DOUBLE_EQ(*path_from_json(path_to_json(a)).absorption_time(), 1.0);
    const CadlagPath e = PathBuilder(3.0).add_jump(1.0, 2.0).set_explosion(2.5).build();
    EXPECT_DOUBLE_EQ(*path_from_json(path_to_json(e)).explosion_time(), 2.5);
}

TEST(PathJson, RejectsMalformedRecords) {
    EXPECT_EQ(code_of([] { path_from_json(Json::parse(R"({"horizon": 1, "jumps": [[2, 1]]})")); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { path_from_json(Json::parse(R"({"horizon": 1, "speed": 3})")); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { path_from_json(Json::parse(R"({"jumps": []})")); }), ErrorCode::ConfigError);
}

TEST(PathNdjson, LinesParseBackToThePath) {
    ModelSpec m = preset("ex-6.2-1");
    m.horizon = 100;
    std::ostringstream out;
    for (std::uint64_t i = 0; i < 20; ++i) out << path_ndjson(sample_path(m, 7, i).path, i) << '\n';
    std::istringstream in(out.str());
    std::string line;
    std::uint64_t i = 0;
    while (std::getline(in, line)) {
        const Json j = Json::parse(line);
        EXPECT_EQ(j.at("index").get<std::uint64_t>(), i);
        const CadlagPath original = sample_path(m, 7, i).path;
        EXPECT_DOUBLE_EQ(j.at("terminal").get<double>(), value_at(original, m.horizon));
        EXPECT_EQ(path_to_json(path_from_json(j)).dump(), path_to_json(original).dump());
        ++i;
    }
    EXPECT_EQ(i, 20u);
}

TEST(Csv, NumbersUseSeventeenDigits) {
    EXPECT_EQ(std::stod(csv_number(0.1)), 0.1);
    EXPECT_EQ(std::stod(csv_number(1.0 / 3.0)), 1.0 / 3.0);
}
