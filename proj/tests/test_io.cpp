#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "normip/io.hpp"
#include "normip/protocols.hpp"
#include "normip/serialize.hpp"
#include "test_util.hpp"

using namespace normip;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("normip_test_" + name)).string();
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("csv round trip is exact") {
    Rng rng(1);
    const Vector v = normip::test::gaussian(50, rng);
    CHECK(parse_vector_csv(format_vector_csv(v)) == v);
    CHECK(parse_vector_csv("1, 2.5\n-3\n") == Vector{1, 2.5, -3});
    CHECK_THROWS(parse_vector_csv("1,abc"));
    CHECK_THROWS(parse_vector_csv("1,nan"));
  }

  TEST_CASE("binary round trip and header") {
    const Vector v{1.5, -2.25, 0.0, 1e-300};
    const std::string path = temp_path("v.bin");
    write_vector_binary(path, v);
    CHECK(std::filesystem::file_size(path) == 8 + 8 * v.size());
    {
      std::ifstream in(path, std::ios::binary);
      unsigned char h[8];
      in.read(reinterpret_cast<char*>(h), 8);
      CHECK(h[0] == 4);
      for (int i = 1; i < 8; ++i) CHECK(h[i] == 0);
    }
    CHECK(read_vector(path) == v);
    std::filesystem::resize_file(path, 20);
    CHECK_THROWS(read_vector_binary(path));
    std::filesystem::remove(path);

    const std::string csv = temp_path("v.csv");
    write_vector_csv(csv, v);
    CHECK(read_vector(csv) == v);
    std::filesystem::remove(csv);
  }

  TEST_CASE("norm JSON round trips") {
    const std::vector<std::string> docs = {
        R"({"type":"lp","p":2})", R"({"type":"lp","p":"inf"})", R"({"type":"topk","k":3})",
        R"({"type":"max","a":{"type":"linf"},"b":{"type":"scaled","factor":0.5,"inner":{"type":"lp","p":1}}})",
        R"({"type":"hsum","h":{"type":"lp","p":1},"parts":[{"type":"lp","p":2},{"type":"lp","p":2}],"blocks":[2,2]})",
        R"({"type":"polytope","rep":{"hrep":[[1,0],[0,1]],"n":2}})"};
    for (const auto& d : docs) {
      const NormSpec s = norm_from_json(Json::parse(d));
      const Json j = to_json(s);
      CHECK(to_json(norm_from_json(j)) == j);
    }
    CHECK(eval_norm(norm_from_json(Json::parse(docs[0])), Vector{3, 4}) == doctest::Approx(5.0));
    CHECK_THROWS(norm_from_json(Json::parse(R"({"type":"weird"})")));
  }

  TEST_CASE("polytope JSON") {
    const Polytope P = polytope_from_json(Json::parse(R"({"hrep":[[1,0],[0,1]],"vrep":[[1,1],[1,-1],[-1,1],[-1,-1]],"n":2})"));
    CHECK(P.has_hrep());
    CHECK(P.has_vrep());
    CHECK(to_json(polytope_from_json(to_json(P))) == to_json(P));
  }

  TEST_CASE("protocol and embedding JSON round trips") {
    const std::vector<ProtocolSpec> specs = {
        lp_protocol(Exponent(1.5), 0.2), lp_protocol(Exponent(3), 0.2), topk_protocol(4, 0.2),
        hsum_topk_protocol(Exponent(1), {1, 2}, 4, 0.2, 0.1),
        ProtocolSpec::embed(linf_into_lp_embedding(4, 2.0, 6),
                            ProtocolSpec::one_way(SparsifierSpec::lp_sampling(Exponent(2), 0.1))),
        ProtocolSpec::vertex_sample(Polytope::cube(2), 0.15),
        ProtocolSpec::one_way(SparsifierSpec::level_set(NormSpec::topk(2), 2, 0.5))};
    const std::vector<std::size_t> dims = {8, 8, 8, 8, 4, 2, 8};
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const Json j = to_json(specs[i]);
      const ProtocolSpec back = protocol_from_json(j);
      CHECK(to_json(back) == j);
      CHECK(declared_cost(back, dims[i]) == declared_cost(specs[i], dims[i]));
    }
    const Embedding e = linf_into_lp_embedding(4, 2.0, 6);
    const Embedding b = embedding_from_json(to_json(e));
    CHECK(b.matrix == e.matrix);
    CHECK(b.distortion == e.distortion);
  }
}
