#include "relay/embedding.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace relay;
using namespace relay::test;

TEST_CASE("extract_metadata projects names and categories", "[embedding]") {
  auto scene = make_scene({{"hammer", "tool"}, {"block", "block"}});
  auto meta = extract_metadata(scene);
  CHECK(meta.involved_objects == std::set<std::string>{"hammer", "block"});
  CHECK(meta.object_count == 2);
  CHECK(meta.tags == std::set<std::string>{"tool", "block"});
}

TEST_CASE("extract_metadata on an empty scene", "[embedding]") {
  SceneFeatures scene;
  auto meta = extract_metadata(scene);
  CHECK(meta.involved_objects.empty());
  CHECK(meta.object_count == 0);
  CHECK(meta.tags.empty());
}

TEST_CASE("extract_metadata dedups categories but counts objects", "[embedding]") {
  auto scene = make_scene({{"bowl_a", "bowl"}, {"bowl_b", "bowl"}});
  auto meta = extract_metadata(scene);
  CHECK(meta.tags == std::set<std::string>{"bowl"});
  CHECK(meta.object_count == 2);
}

TEST_CASE("cosine identities", "[embedding]") {
  std::vector<double> v{0.2, -0.5, 0.7};
  CHECK(cosine(v, v) == Catch::Approx(1.0).margin(1e-12));
  CHECK(cosine({1, 0}, {0, 1}) == Catch::Approx(0.0).margin(1e-12));
  CHECK(cosine({1, 2, 2}, {2, 1, 2}) == Catch::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("cosine rejects bad input", "[embedding]") {
  CHECK_THROWS_AS(cosine({1, 0}, {1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(cosine({0, 0}, {1, 0}), std::invalid_argument);
}

TEST_CASE("cosine symmetry and scale invariance", "[embedding]") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto a = random_unit_vector(rng, 16);
    auto b = random_unit_vector(rng, 16);
    CHECK(cosine(a, b) == Catch::Approx(cosine(b, a)).margin(1e-15));
    std::vector<double> a3(a);
    for (auto& x : a3) x *= 3.75;
    CHECK(cosine(a3, b) == Catch::Approx(cosine(a, b)).margin(1e-12));
  }
}

TEST_CASE("embed_task is deterministic and unit norm", "[embedding]") {
  EmbedderConfig cfg;
  auto scene = make_scene({{"pot", "cookware"}});
  auto meta = extract_metadata(scene);
  auto a = embed_task("lift the pot", scene, meta, cfg);
  auto b = embed_task("lift the pot", scene, meta, cfg);
  CHECK(a.vector == b.vector);
  CHECK(l2_norm(a.vector) == Catch::Approx(1.0).margin(1e-9));
  CHECK(a.vector.size() == static_cast<std::size_t>(cfg.d));
}

TEST_CASE("unit norm holds across generated inputs", "[embedding]") {
  EmbedderConfig cfg;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    SceneFeatures scene;
    int objs = static_cast<int>(rng() % 4);
    for (int o = 0; o < objs; ++o)
      scene.objects.push_back(SceneObject{
          "obj" + std::to_string(o),
          {uniform_in(rng, -1, 1), uniform_in(rng, -1, 1), uniform_in(rng, 0, 1)},
          "cat" + std::to_string(o % 2)});
    scene.camera_pose = {uniform_in(rng, -1, 1), -0.8, 0.6, 0.9, 0.0, 0.0};
    auto meta = extract_metadata(scene);
    auto rep = embed_task("instruction word" + std::to_string(i), scene, meta, cfg);
    REQUIRE(l2_norm(rep.vector) == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("moving an object changes the scene block", "[embedding]") {
  EmbedderConfig cfg;
  auto scene = make_scene({{"pot", "cookware"}});
  auto meta = extract_metadata(scene);
  auto a = embed_task("lift the pot", scene, meta, cfg);
  scene.objects[0].position[0] += 0.5;
  auto b = embed_task("lift the pot", scene, meta, cfg);
  CHECK(cosine(a.vector, b.vector) < 1.0 - 1e-6);
}

TEST_CASE("locality: cosine decays monotonically with displacement", "[embedding]") {
  for (std::uint64_t seed : {1ULL, 42ULL, 1234ULL}) {
    EmbedderConfig cfg;
    cfg.hash_seed = seed;
    auto scene = make_scene({{"pot", "cookware"}, {"lid", "cookware"}});
    auto meta = extract_metadata(scene);
    auto base = embed_task("lift the pot", scene, meta, cfg);
    double prev = 1.0 + 1e-12;
    for (double eps : {0.0, 0.1, 0.5, 2.0}) {
      auto moved = scene;
      moved.objects[0].position[0] += eps;
      auto rep = embed_task("lift the pot", moved, extract_metadata(moved), cfg);
      double sim = cosine(base.vector, rep.vector);
      CHECK(sim <= prev + 1e-12);
      prev = sim;
    }
  }
}

TEST_CASE("renaming an object changes the metadata block", "[embedding]") {
  EmbedderConfig cfg;
  auto scene_a = make_scene({{"pot", "cookware"}});
  auto scene_b = make_scene({{"pan", "cookware"}});
  auto a = embed_task("lift the pot", scene_a, extract_metadata(scene_a), cfg);
  auto b = embed_task("lift the pot", scene_b, extract_metadata(scene_b), cfg);
  CHECK(cosine(a.vector, b.vector) < 1.0 - 1e-9);
}

TEST_CASE("camera pose shifts the embedding", "[embedding]") {
  EmbedderConfig cfg;
  auto scene = make_scene({{"pot", "cookware"}});
  auto meta = extract_metadata(scene);
  auto a = embed_task("lift the pot", scene, meta, cfg);
  auto moved = scene;
  moved.camera_pose[0] += 0.3;
  moved.camera_pose[3] += 0.2;
  auto b = embed_task("lift the pot", moved, meta, cfg);
  CHECK(cosine(a.vector, b.vector) < 1.0 - 1e-9);
}

TEST_CASE("different instructions diverge in the text block", "[embedding]") {
  EmbedderConfig cfg;
  auto scene = make_scene({{"pot", "cookware"}});
  auto meta = extract_metadata(scene);
  auto a = embed_task("lift the pot", scene, meta, cfg);
  auto b = embed_task("shake the bottle now", scene, meta, cfg);
  CHECK(cosine(a.vector, b.vector) < 1.0 - 1e-6);
}

TEST_CASE("embedder configuration is validated", "[embedding]") {
  EmbedderConfig cfg;
  cfg.text_dims = 100;  // 100 + 96 + 32 != 256
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);

  EmbedderConfig ok;
  CHECK_NOTHROW(ok.check());
}

TEST_CASE("empty instruction is rejected", "[embedding]") {
  EmbedderConfig cfg;
  auto scene = make_scene({{"pot", "cookware"}});
  CHECK_THROWS_AS(embed_task("", scene, extract_metadata(scene), cfg), std::invalid_argument);
}

TEST_CASE("seed changes the embedding", "[embedding]") {
  EmbedderConfig a_cfg, b_cfg;
  b_cfg.hash_seed = a_cfg.hash_seed + 1;
  auto scene = make_scene({{"pot", "cookware"}});
  auto meta = extract_metadata(scene);
  auto a = embed_task("lift the pot", scene, meta, a_cfg);
  auto b = embed_task("lift the pot", scene, meta, b_cfg);
  CHECK(a.vector != b.vector);
}

TEST_CASE("text_only ablation ignores scene and metadata", "[embedding]") {
  EmbedderConfig cfg;
  cfg.text_only = true;
  auto scene_a = make_scene({{"pot", "cookware"}});
  auto scene_b = make_scene({{"pan", "metal"}, {"lid", "metal"}});
  auto a = embed_task("lift the pot", scene_a, extract_metadata(scene_a), cfg);
  auto b = embed_task("lift the pot", scene_b, extract_metadata(scene_b), cfg);
  CHECK(cosine(a.vector, b.vector) == Catch::Approx(1.0).margin(1e-12));
}
