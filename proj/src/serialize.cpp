#include "normip/serialize.hpp"

#include <stdexcept>

namespace normip {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<Vector> rows_from_json(const Json& j) {
  std::vector<Vector> rows;
  for (const auto& r : j) rows.push_back(r.get<Vector>());
  return rows;
}

std::optional<std::size_t> optional_dim(const Json& j) {
  if (j.contains("n")) return j.at("n").get<std::size_t>();
  return std::nullopt;
}

}  // namespace

Json exponent_to_json(Exponent p) {
  if (p.is_infinite()) return "inf";
  return p.value();
}

Exponent exponent_from_json(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return Exponent::infinity();
    throw std::invalid_argument("exponent: expected a number or \"inf\"");
  }
  return Exponent(j.get<double>());
}

Json to_json(const NormSpec& spec) {
  return std::visit(
      overloaded{
          [](const LpNorm& n) {
            Json j{{"type", "lp"}, {"p", exponent_to_json(n.p)}};
            if (n.dim) j["n"] = *n.dim;
            return j;
          },
          [](const TopKNorm& n) {
            Json j{{"type", "topk"}, {"k", n.k}};
            if (n.dim) j["n"] = *n.dim;
            return j;
          },
          [](const MaxNorm& n) { return Json{{"type", "max"}, {"a", to_json(n.a)}, {"b", to_json(n.b)}}; },
          [](const HSumNorm& n) {
            Json parts = Json::array();
            for (const auto& p : n.parts) parts.push_back(to_json(p));
            Json j{{"type", "hsum"}, {"h", to_json(n.outer)}, {"parts", parts}};
            if (!n.blocks.empty()) j["blocks"] = n.blocks;
            return j;
          },
          [](const ScaledNorm& n) { return Json{{"type", "scaled"}, {"inner", to_json(n.inner)}, {"factor", n.factor}}; },
          [](const DualNorm& n) { return Json{{"type", "dual"}, {"primal", to_json(n.primal)}}; },
          [](const PolytopeNorm& n) { return Json{{"type", "polytope"}, {"rep", to_json(n.body)}}; },
          [](const OracleNorm& n) -> Json {
            throw std::invalid_argument("oracle norm '" + n.name + "' cannot be serialized");
          },
      },
      spec.node());
}

NormSpec norm_from_json(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "lp") return NormSpec::lp(exponent_from_json(j.at("p")), optional_dim(j));
  if (type == "linf") return NormSpec::linf(optional_dim(j));
  if (type == "topk") return NormSpec::topk(j.at("k").get<std::size_t>(), optional_dim(j));
  if (type == "max") return NormSpec::max_of(norm_from_json(j.at("a")), norm_from_json(j.at("b")));
  if (type == "hsum") {
    std::vector<NormSpec> parts;
    for (const auto& p : j.at("parts")) parts.push_back(norm_from_json(p));
    std::vector<std::size_t> blocks;
    if (j.contains("blocks")) blocks = j.at("blocks").get<std::vector<std::size_t>>();
    return NormSpec::hsum(norm_from_json(j.at("h")), std::move(parts), std::move(blocks));
  }
  if (type == "scaled") return NormSpec::scaled(norm_from_json(j.at("inner")), j.at("factor").get<double>());
  if (type == "dual") return NormSpec::dual_of(norm_from_json(j.at("primal")));
  if (type == "polytope") return NormSpec::polytope(polytope_from_json(j.at("rep")));
  throw std::invalid_argument("norm: unknown type '" + type + "'");
}

Json to_json(const Polytope& P) {
  return Json{{"n", P.dim()}, {"hrep", P.has_hrep() ? Json(P.hrep()) : Json::array()},
              {"vrep", P.has_vrep() ? Json(P.vrep()) : Json::array()}};
}

Polytope polytope_from_json(const Json& j) {
  const auto h = j.contains("hrep") ? rows_from_json(j.at("hrep")) : std::vector<Vector>{};
  const auto v = j.contains("vrep") ? rows_from_json(j.at("vrep")) : std::vector<Vector>{};
  Polytope P = [&] {
    if (!h.empty() && !v.empty()) return Polytope::from_both(h, v);
    if (!h.empty()) return Polytope::from_hrep(h);
    if (!v.empty()) return Polytope::from_vrep(v);
    throw std::invalid_argument("polytope: needs hrep or vrep");
  }();
  if (j.contains("n") && j.at("n").get<std::size_t>() != P.dim())
    throw std::invalid_argument("polytope: n does not match the representation");
  return P;
}

Json to_json(const SparsifierSpec& s) {
  Json j{{"epsilon", s.epsilon}, {"delta", s.delta}};
  switch (s.kind) {
    case SparsifierKind::lp_sampling:
      j["kind"] = "lp_sampling";
      j["p"] = exponent_to_json(s.p);
      j["constant"] = s.constant;
      break;
    case SparsifierKind::level_set:
      j["kind"] = "level_set";
      j["norm"] = to_json(*s.norm);
      j["k"] = s.claim_k;
      if (s.claim_eps) j["claim_eps"] = *s.claim_eps;
      j["constant"] = s.constant;
      break;
    case SparsifierKind::identity:
      j["kind"] = "identity";
      j.erase("delta");
      break;
  }
  if (s.max_samples) j["max_samples"] = *s.max_samples;
  return j;
}

SparsifierSpec sparsifier_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  SparsifierSpec s;
  if (kind == "lp_sampling") {
    s = SparsifierSpec::lp_sampling(exponent_from_json(j.at("p")), j.at("epsilon").get<double>(),
                                    j.value("delta", 1.0 / 3.0), j.value("constant", 36.0));
  } else if (kind == "level_set") {
    s = SparsifierSpec::level_set(norm_from_json(j.at("norm")), j.at("k").get<std::size_t>(),
                                  j.at("epsilon").get<double>(), j.value("delta", 1.0 / 3.0), j.value("constant", 8.0));
    if (j.contains("claim_eps")) s.claim_eps = j.at("claim_eps").get<double>();
  } else if (kind == "identity") {
    s = SparsifierSpec::identity(j.value("epsilon", 0.01));
  } else {
    throw std::invalid_argument("sparsifier: unknown kind '" + kind + "'");
  }
  if (j.contains("max_samples")) s.max_samples = j.at("max_samples").get<std::size_t>();
  s.validate();
  return s;
}

Json to_json(const Embedding& e) {
  return Json{{"rows", e.rows},
              {"cols", e.cols},
              {"matrix", e.matrix},
              {"distortion", e.distortion},
              {"source", to_json(e.source)},
              {"target", to_json(e.target)}};
}

Embedding embedding_from_json(const Json& j) {
  Embedding e;
  e.rows = j.at("rows").get<std::size_t>();
  e.cols = j.at("cols").get<std::size_t>();
  e.matrix = j.at("matrix").get<std::vector<double>>();
  e.distortion = j.at("distortion").get<double>();
  e.source = norm_from_json(j.at("source"));
  e.target = norm_from_json(j.at("target"));
  if (e.matrix.size() != e.rows * e.cols) throw std::invalid_argument("embedding: matrix is not rows x cols");
  return e;
}

Json to_json(const ProtocolSpec& spec) {
  return std::visit(overloaded{
                        [](const OneWaySparsify& s) {
                          return Json{{"type", "one_way"}, {"sparsifier", to_json(s.sparsifier)}, {"scale", s.scale}};
                        },
                        [](const Swap& s) { return Json{{"type", "swap"}, {"inner", to_json(s.inner)}}; },
                        [](const MaxSplit& s) {
                          return Json{{"type", "max_split"},
                                      {"a", to_json(s.a)},
                                      {"b", to_json(s.b)},
                                      {"inner_a", to_json(s.inner_a)},
                                      {"inner_b", to_json(s.inner_b)}};
                        },
                        [](const HSumCompose& s) {
                          Json inner = Json::array();
                          for (const auto& p : s.inner) inner.push_back(to_json(p));
                          return Json{{"type", "hsum"},
                                      {"space", to_json(s.space)},
                                      {"outer", to_json(s.outer)},
                                      {"inner", inner},
                                      {"repeat_constant", s.repeat_constant}};
                        },
                        [](const EmbedReduce& s) {
                          return Json{{"type", "embed"}, {"embedding", to_json(s.embedding)}, {"inner", to_json(s.inner)}};
                        },
                        [](const VertexSample& s) {
                          return Json{{"type", "vertex_sample"},
                                      {"polytope", to_json(s.body)},
                                      {"epsilon", s.epsilon},
                                      {"constant", s.constant}};
                        },
                    },
                    spec.node());
}

ProtocolSpec protocol_from_json(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "one_way") return ProtocolSpec::one_way(sparsifier_from_json(j.at("sparsifier")), j.value("scale", 1.0));
  if (type == "swap") return ProtocolSpec::swap(protocol_from_json(j.at("inner")));
  if (type == "max_split")
    return ProtocolSpec::max_split(norm_from_json(j.at("a")), norm_from_json(j.at("b")),
                                   protocol_from_json(j.at("inner_a")), protocol_from_json(j.at("inner_b")));
  if (type == "hsum") {
    std::vector<ProtocolSpec> inner;
    for (const auto& p : j.at("inner")) inner.push_back(protocol_from_json(p));
    return ProtocolSpec::hsum(norm_from_json(j.at("space")), sparsifier_from_json(j.at("outer")), std::move(inner),
                              j.value("repeat_constant", 4.0));
  }
  if (type == "embed") return ProtocolSpec::embed(embedding_from_json(j.at("embedding")), protocol_from_json(j.at("inner")));
  if (type == "vertex_sample")
    return ProtocolSpec::vertex_sample(polytope_from_json(j.at("polytope")), j.at("epsilon").get<double>(),
                                       j.value("constant", 4.0));
  if (type == "lp_protocol")
    return lp_protocol(exponent_from_json(j.at("p")), j.at("epsilon").get<double>(), j.value("delta", 1.0 / 3.0));
  if (type == "topk_protocol")
    return topk_protocol(j.at("k").get<std::size_t>(), j.at("epsilon").get<double>(), j.value("delta", 1.0 / 3.0));
  throw std::invalid_argument("protocol: unknown type '" + type + "'");
}

}  // namespace normip
