#pragma once

#include "capforge/catalogue.hpp"

#include <json.hpp>

#include <string>

namespace capforge::mlp {

// Derives the NSF Abstract Language: a JSON Schema accepting exactly the MLP
// documents for which validate_mlp reports no ownership/operator/type/
// structure errors. Cross-field checks (mandatory capabilities, external
// data, policy attributes, dependencies) remain in validate_mlp. Inverted
// ranges spelled "hi-lo" are already rejected by parse_mlp and are outside
// the schema's domain.
//
// The output is deterministic: the same resolved NSF yields a byte-identical
// document via emit_abstract_language_text.
nlohmann::json emit_abstract_language(const catalogue::ResolvedNsf& nsf,
                                      const catalogue::Catalogue& cat);

std::string emit_abstract_language_text(const catalogue::ResolvedNsf& nsf,
                                        const catalogue::Catalogue& cat);

} // namespace capforge::mlp
