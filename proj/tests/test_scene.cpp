#include <catch_amalgamated.hpp>

#include <random>

#include "seld/scene.hpp"
#include "seld/simulate.hpp"

using namespace seld;

TEST_CASE("script_to_noas basics") {
  const FrameGrid grid;
  CHECK(script_to_noas(SceneScript{}, grid) == std::vector<int>(3000, 0));

  SceneScript one;
  one.events.push_back({0, 1.0, 2.0, {0, 0}});
  const auto track = script_to_noas(one, grid);
  for (int f = 0; f < 3000; ++f) {
    const int expected = (f >= 50 && f < 100) ? 1 : 0;
    REQUIRE(track[f] == expected);
  }

  SceneScript two = one;
  two.events.push_back({1, 1.0, 2.0, {10, 0}});
  const auto track2 = script_to_noas(two, grid);
  for (int f = 50; f < 100; ++f) REQUIRE(track2[f] == 2);
}

TEST_CASE("metadata CSV round trip") {
  SceneScript s;
  CHECK(write_metadata_csv(s) == std::string(kMetadataHeader) + "\n");

  s.events.push_back({4, 1.25, 3.5, {-30, 20}});
  const SceneScript parsed = parse_metadata_csv(write_metadata_csv(s));
  REQUIRE(parsed.events.size() == 1);
  CHECK(parsed.events[0].class_id == 4);
  CHECK(parsed.events[0].onset_s == Catch::Approx(1.25));
  CHECK(parsed.events[0].offset_s == Catch::Approx(3.5));
  CHECK(parsed.events[0].doa == GridDoa{-30, 20});
}

TEST_CASE("metadata CSV round trip over random valid scripts") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const SceneScript s = generate_scene(SimConfig{}, rng);
    const SceneScript p = parse_metadata_csv(write_metadata_csv(s));
    REQUIRE(p.events.size() == s.events.size());
    for (size_t i = 0; i < s.events.size(); ++i) {
      CHECK(p.events[i].class_id == s.events[i].class_id);
      CHECK(p.events[i].onset_s == Catch::Approx(s.events[i].onset_s).margin(1e-9));
      CHECK(p.events[i].offset_s == Catch::Approx(s.events[i].offset_s).margin(1e-9));
      CHECK(p.events[i].doa == s.events[i].doa);
    }
  }
}

TEST_CASE("metadata CSV rejects bad input") {
  CHECK_THROWS_AS(parse_metadata_csv(""), ValidationError);
  CHECK_THROWS_AS(parse_metadata_csv("bogus,header\n"), ValidationError);

  const std::string header(kMetadataHeader);
  CHECK_THROWS_AS(parse_metadata_csv(header + "\nunknownclass,1,2,0,0,1\n"), ValidationError);
  CHECK_THROWS_AS(parse_metadata_csv(header + "\nspeech,1,2,0,5,1\n"), ValidationError);  // off grid
  CHECK_THROWS_AS(parse_metadata_csv(header + "\nspeech,2,1,0,0,1\n"), ValidationError);  // reversed

  // 3-deep overlap
  const std::string deep = header +
                           "\nspeech,1,5,0,0,1"
                           "\ncough,2,6,0,10,1"
                           "\nknock,3,7,0,20,1\n";
  CHECK_THROWS_AS(parse_metadata_csv(deep), ValidationError);
}

TEST_CASE("noas track from scripts never exceeds 2") {
  std::mt19937_64 rng(31);
  const FrameGrid grid;
  for (int trial = 0; trial < 20; ++trial) {
    const SceneScript s = generate_scene(SimConfig{}, rng);
    const auto track = script_to_noas(s, grid);
    for (int v : track) CHECK((v >= 0 && v <= 2));
  }
}
