#pragma once

#include <map>
#include <string>

namespace ltlkit {

/// Maps atomic propositions to natural-language descriptions in one domain.
struct DomainContext {
    std::string domain_label;
    std::map<std::string, std::string> definitions;

    /// Throws InvalidInput unless definitions is nonempty, every key is a
    /// valid atom name, and every description is nonempty.
    void validate() const;

    bool has(const std::string& atom) const { return definitions.count(atom) != 0; }

    friend bool operator==(const DomainContext&, const DomainContext&) = default;
};

} // namespace ltlkit
