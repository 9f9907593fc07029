#pragma once

#include <compare>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ftfloor {

/// Default namespace for all named individuals of the factory ontology.
inline constexpr std::string_view kFtNamespace = "http://iot.uni-trier.de/FTOnto#";

inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view kXsdBoolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr std::string_view kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";

/// Absolute identifier. Values without a scheme resolve against kFtNamespace.
struct Iri {
  std::string value;

  Iri() = default;
  explicit Iri(std::string v);

  /// Builds an IRI from a local name in the default namespace.
  static Iri local(std::string_view name);

  /// Fragment after '#' (or the last '/'), used for display and tests.
  std::string local_name() const;

  auto operator<=>(const Iri&) const = default;
};

enum class LiteralType { string, boolean, integer };

struct Literal {
  std::string lexical;
  LiteralType datatype = LiteralType::string;

  static Literal str(std::string v) { return Literal{std::move(v), LiteralType::string}; }
  static Literal boolean(bool b) { return Literal{b ? "true" : "false", LiteralType::boolean}; }
  static Literal integer(long long n);

  /// Lexical form must match the datatype; throws std::invalid_argument otherwise.
  void check() const;

  auto operator<=>(const Literal&) const = default;
};

std::string_view datatype_iri(LiteralType t);

/// Object position of a triple: either a named node or a literal.
using Term = std::variant<Iri, Literal>;

std::string to_string(const Term& t);

struct Triple {
  Iri subject;
  Iri predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
};

/// Closed predicate vocabulary. Every triple the catalog emits uses one of these.
namespace vocab {
inline const Iri kType{"http://www.w3.org/1999/02/22-rdf-syntax-ns#type"};
inline const Iri kSubClassOf{"http://www.w3.org/2000/01/rdf-schema#subClassOf"};
inline const Iri kHasDescription{std::string(kFtNamespace) + "hasDescription"};
inline const Iri kHasPrecondition{std::string(kFtNamespace) + "hasPrecondition"};
inline const Iri kHasPostcondition{std::string(kFtNamespace) + "hasPostcondition"};
inline const Iri kHasUrl{std::string(kFtNamespace) + "hasURL"};
inline const Iri kIsCheckedBy{std::string(kFtNamespace) + "isCheckedBy"};
inline const Iri kRequiredKey{std::string(kFtNamespace) + "requiredKeyInServiceResponse"};
inline const Iri kRequiredValue{std::string(kFtNamespace) + "requiredValueInServiceResponse"};
inline const Iri kActuates{std::string(kFtNamespace) + "actuates"};
}  // namespace vocab

/// A condition resolved to the service that checks it: invoke checker_url and
/// compare response[required_key] against required_value (case-insensitive).
struct ConditionBinding {
  Iri condition;
  std::string checker_url;
  std::string required_key;
  std::string required_value;

  auto operator<=>(const ConditionBinding&) const = default;
};

enum class ConditionRole { pre, post };

/// Variable in a basic graph pattern, e.g. "?service".
struct Var {
  std::string name;
  auto operator<=>(const Var&) const = default;
};

using PatternTerm = std::variant<Var, Iri, Literal>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
};

/// One solution of a pattern match: variable name -> bound term.
using Binding = std::map<std::string, Term>;

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct UnknownResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string kind;     // e.g. "missing_checker", "checker_without_url"
  Iri subject;          // the offending individual
  std::string detail;
};

/// Immutable in-memory triple store with set semantics and deterministic
/// query ordering. Built once (from the catalog or a triple file), then read
/// concurrently.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::vector<Triple> triples);

  std::size_t size() const { return triples_.size(); }
  bool contains(const Triple& t) const;
  const std::vector<Triple>& triples() const { return triples_; }

  /// Conjunctive basic-graph-pattern evaluation. Shared variables join.
  /// Results are deduplicated and sorted lexicographically by bound values.
  std::vector<Binding> match(std::span<const TriplePattern> patterns) const;
  std::vector<Binding> match(std::initializer_list<TriplePattern> patterns) const;

  /// The five-way condition-retrieval join for one service URL, generalized
  /// over the pre/post role. Unknown URLs yield an empty list.
  std::vector<ConditionBinding> conditions_of(std::string_view service_url,
                                              ConditionRole role) const;

  /// Instances of the class or any transitive subclass, sorted, deduplicated.
  std::vector<Iri> descendants(const Iri& class_iri) const;

  /// Service URLs unusable while the given machines are faulted: provided by
  /// a faulted machine, or carrying a readiness precondition on one.
  /// Throws UnknownResourceError when a fault-set member is not a known
  /// machine individual.
  std::vector<std::string> unavailable_services(const std::set<Iri>& fault_set) const;
  std::vector<std::string> unavailable_services(const Iri& machine) const;

  /// Structural consistency scan; an empty report means consistent.
  std::vector<Violation> validate() const;

 private:
  std::vector<Triple> triples_;  // sorted, unique
  std::map<Iri, std::vector<std::size_t>> by_subject_;
  std::map<Iri, std::vector<std::size_t>> by_predicate_;
  std::map<Term, std::vector<std::size_t>> by_object_;
  std::map<std::pair<Iri, Term>, std::vector<std::size_t>> by_predicate_object_;

  std::vector<std::size_t> candidates(const TriplePattern& p, const Binding& bound) const;
  friend class KbBuilder;
};

/// Parses the line-oriented triple format: `<s>\t<p>\t<o>` per line, IRIs in
/// angle brackets, literals as "lexical"^^<datatype>, comments starting '#'.
/// Duplicates collapse. Throws ParseError with a 1-based line number.
KnowledgeBase load_triples(std::string_view text);

/// Canonical serialization (sorted lines); load_triples(dump_triples(kb))
/// reproduces kb, and dump is the identity on its own output.
std::string dump_triples(const KnowledgeBase& kb);

/// RDF/XML-like display fragment for one service individual: type,
/// description, preconditions (sorted), postconditions (sorted), URL.
/// Display only; the triple file is the persistence format.
std::string render_individual(const KnowledgeBase& kb, const Iri& service);

}  // namespace ftfloor
