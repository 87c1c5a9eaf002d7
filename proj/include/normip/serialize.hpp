#pragma once

#include "json.hpp"

#include "normip/norms.hpp"
#include "normip/polytopes.hpp"
#include "normip/protocols.hpp"
#include "normip/spaces.hpp"
#include "normip/sparsifiers.hpp"

namespace normip {

using Json = nlohmann::json;

/// Exponents are numbers, or the string "inf".
Json exponent_to_json(Exponent p);
Exponent exponent_from_json(const Json& j);

/// {"type":"lp","p":2}, {"type":"topk","k":3}, {"type":"max","a":..,"b":..},
/// {"type":"hsum","h":..,"parts":[..]}, {"type":"scaled","inner":..,"factor":c},
/// {"type":"dual","primal":..}, {"type":"polytope","rep":..}. Optional "n"
/// fixes the dimension of lp and topk. Oracles do not serialize.
Json to_json(const NormSpec& spec);
NormSpec norm_from_json(const Json& j);

/// {"hrep":[[..]],"vrep":[[..]],"n":k}; either list may be empty.
Json to_json(const Polytope& P);
Polytope polytope_from_json(const Json& j);

Json to_json(const SparsifierSpec& s);
SparsifierSpec sparsifier_from_json(const Json& j);

Json to_json(const Embedding& e);
Embedding embedding_from_json(const Json& j);

/// Mirrors the combinator tree. Besides the node types, the reader accepts
/// the shorthands {"type":"lp_protocol","p":..,"epsilon":..} and
/// {"type":"topk_protocol","k":..,"epsilon":..}, each with optional "delta".
Json to_json(const ProtocolSpec& spec);
ProtocolSpec protocol_from_json(const Json& j);

}  // namespace normip
