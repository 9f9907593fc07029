#include "ftfloor/kb.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "ftfloor/util.hpp"

namespace ftfloor {

Iri::Iri(std::string v) : value(std::move(v)) {
  if (value.empty()) throw std::invalid_argument("empty IRI");
  if (value.find(':') == std::string::npos) value = std::string(kFtNamespace) + value;
}

Iri Iri::local(std::string_view name) { return Iri(std::string(kFtNamespace) + std::string(name)); }

std::string Iri::local_name() const {
  auto hash = value.rfind('#');
  if (hash != std::string::npos) return value.substr(hash + 1);
  auto slash = value.rfind('/');
  if (slash != std::string::npos) return value.substr(slash + 1);
  return value;
}

Literal Literal::integer(long long n) { return Literal{std::to_string(n), LiteralType::integer}; }

void Literal::check() const {
  switch (datatype) {
    case LiteralType::string:
      return;
    case LiteralType::boolean:
      if (lexical != "true" && lexical != "false")
        throw std::invalid_argument("boolean literal must be 'true' or 'false': " + lexical);
      return;
    case LiteralType::integer: {
      if (lexical.empty()) throw std::invalid_argument("empty integer literal");
      std::size_t i = (lexical[0] == '-' || lexical[0] == '+') ? 1 : 0;
      if (i == lexical.size()) throw std::invalid_argument("bad integer literal: " + lexical);
      for (; i < lexical.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(lexical[i])))
          throw std::invalid_argument("bad integer literal: " + lexical);
      return;
    }
  }
}

std::string_view datatype_iri(LiteralType t) {
  switch (t) {
    case LiteralType::string: return kXsdString;
    case LiteralType::boolean: return kXsdBoolean;
    case LiteralType::integer: return kXsdInteger;
  }
  return kXsdString;
}

std::string to_string(const Term& t) {
  if (const auto* iri = std::get_if<Iri>(&t)) return iri->value;
  return std::get<Literal>(t).lexical;
}

// --- store construction ------------------------------------------------

KnowledgeBase::KnowledgeBase(std::vector<Triple> triples) : triples_(std::move(triples)) {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const Triple& t = triples_[i];
    by_subject_[t.subject].push_back(i);
    by_predicate_[t.predicate].push_back(i);
    by_object_[t.object].push_back(i);
    by_predicate_object_[{t.predicate, t.object}].push_back(i);
  }
}

bool KnowledgeBase::contains(const Triple& t) const {
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

// --- pattern matching ---------------------------------------------------

namespace {

// Substitutes bound variables into a pattern position.
PatternTerm resolve(const PatternTerm& p, const Binding& bound) {
  if (const auto* v = std::get_if<Var>(&p)) {
    auto it = bound.find(v->name);
    if (it != bound.end()) {
      if (const auto* iri = std::get_if<Iri>(&it->second)) return *iri;
      return std::get<Literal>(it->second);
    }
  }
  return p;
}

bool term_matches(const PatternTerm& p, const Term& t) {
  if (std::holds_alternative<Var>(p)) return true;
  if (const auto* iri = std::get_if<Iri>(&p)) {
    const auto* ti = std::get_if<Iri>(&t);
    return ti && *ti == *iri;
  }
  const auto* tl = std::get_if<Literal>(&t);
  return tl && *tl == std::get<Literal>(p);
}

bool iri_matches(const PatternTerm& p, const Iri& i) {
  if (std::holds_alternative<Var>(p)) return true;
  const auto* pi = std::get_if<Iri>(&p);
  return pi && *pi == i;
}

// Returns false when the variable is already bound to a different value,
// which rejects triples violating a repeated variable within one pattern.
bool bind_var(Binding& b, const PatternTerm& p, const Term& value) {
  const auto* v = std::get_if<Var>(&p);
  if (!v) return true;
  auto it = b.find(v->name);
  if (it != b.end()) return it->second == value;
  b.emplace(v->name, value);
  return true;
}

}  // namespace

std::vector<std::size_t> KnowledgeBase::candidates(const TriplePattern& raw,
                                                   const Binding& bound) const {
  TriplePattern p{resolve(raw.subject, bound), resolve(raw.predicate, bound),
                  resolve(raw.object, bound)};

  if (const auto* s = std::get_if<Iri>(&p.subject)) {
    auto it = by_subject_.find(*s);
    return it == by_subject_.end() ? std::vector<std::size_t>{} : it->second;
  }
  const bool p_const = std::holds_alternative<Iri>(p.predicate);
  const bool o_const = !std::holds_alternative<Var>(p.object);
  if (p_const && o_const) {
    Term o = std::holds_alternative<Iri>(p.object) ? Term(std::get<Iri>(p.object))
                                                   : Term(std::get<Literal>(p.object));
    auto it = by_predicate_object_.find({std::get<Iri>(p.predicate), o});
    return it == by_predicate_object_.end() ? std::vector<std::size_t>{} : it->second;
  }
  if (o_const) {
    Term o = std::holds_alternative<Iri>(p.object) ? Term(std::get<Iri>(p.object))
                                                   : Term(std::get<Literal>(p.object));
    auto it = by_object_.find(o);
    return it == by_object_.end() ? std::vector<std::size_t>{} : it->second;
  }
  if (p_const) {
    auto it = by_predicate_.find(std::get<Iri>(p.predicate));
    return it == by_predicate_.end() ? std::vector<std::size_t>{} : it->second;
  }
  std::vector<std::size_t> all(triples_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

std::vector<Binding> KnowledgeBase::match(std::span<const TriplePattern> patterns) const {
  std::vector<Binding> results;
  if (patterns.empty()) return results;

  // Depth-first join in pattern order; indexes prune each level.
  std::vector<Binding> frontier{Binding{}};
  for (const TriplePattern& pat : patterns) {
    std::vector<Binding> next;
    for (const Binding& bound : frontier) {
      const TriplePattern resolved{resolve(pat.subject, bound), resolve(pat.predicate, bound),
                                   resolve(pat.object, bound)};
      for (std::size_t idx : candidates(resolved, bound)) {
        const Triple& t = triples_[idx];
        if (!iri_matches(resolved.subject, t.subject)) continue;
        if (!iri_matches(resolved.predicate, t.predicate)) continue;
        if (!term_matches(resolved.object, t.object)) continue;
        Binding extended = bound;
        if (!bind_var(extended, pat.subject, Term(t.subject))) continue;
        if (!bind_var(extended, pat.predicate, Term(t.predicate))) continue;
        if (!bind_var(extended, pat.object, t.object)) continue;
        next.push_back(std::move(extended));
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) return frontier;
  }

  std::sort(frontier.begin(), frontier.end());
  frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
  return frontier;
}

std::vector<Binding> KnowledgeBase::match(std::initializer_list<TriplePattern> patterns) const {
  return match(std::span<const TriplePattern>(patterns.begin(), patterns.size()));
}

std::vector<ConditionBinding> KnowledgeBase::conditions_of(std::string_view service_url,
                                                           ConditionRole role) const {
  const Iri& link = role == ConditionRole::pre ? vocab::kHasPrecondition : vocab::kHasPostcondition;
  const TriplePattern query[] = {
      {Var{"?service"}, vocab::kHasUrl, Literal::str(std::string(service_url))},
      {Var{"?service"}, link, Var{"?condition"}},
      {Var{"?condition"}, vocab::kIsCheckedBy, Var{"?checkService"}},
      {Var{"?checkService"}, vocab::kHasUrl, Var{"?checkURL"}},
      {Var{"?condition"}, vocab::kRequiredKey, Var{"?requiredKey"}},
      {Var{"?condition"}, vocab::kRequiredValue, Var{"?requiredValue"}},
  };
  std::vector<ConditionBinding> out;
  for (const Binding& b : match(query)) {
    out.push_back(ConditionBinding{
        std::get<Iri>(b.at("?condition")),
        to_string(b.at("?checkURL")),
        to_string(b.at("?requiredKey")),
        to_string(b.at("?requiredValue")),
    });
  }
  std::sort(out.begin(), out.end(),
            [](const ConditionBinding& a, const ConditionBinding& b) { return a.condition < b.condition; });
  return out;
}

std::vector<Iri> KnowledgeBase::descendants(const Iri& class_iri) const {
  // Transitive closure over subClassOf, then instance membership.
  std::set<Iri> classes{class_iri};
  std::vector<Iri> work{class_iri};
  while (!work.empty()) {
    Iri cls = std::move(work.back());
    work.pop_back();
    for (std::size_t idx : candidates({Var{"?s"}, vocab::kSubClassOf, cls}, {})) {
      const Triple& t = triples_[idx];
      if (t.predicate != vocab::kSubClassOf || t.object != Term(cls)) continue;
      if (classes.insert(t.subject).second) work.push_back(t.subject);
    }
  }
  std::set<Iri> instances;
  for (const Iri& cls : classes) {
    for (std::size_t idx : candidates({Var{"?s"}, vocab::kType, cls}, {})) {
      const Triple& t = triples_[idx];
      if (t.predicate == vocab::kType && t.object == Term(cls)) instances.insert(t.subject);
    }
  }
  return {instances.begin(), instances.end()};
}

namespace {

bool is_machine_individual(const KnowledgeBase& kb, const Iri& machine) {
  auto instances = kb.descendants(Iri::local("Machine"));
  return std::find(instances.begin(), instances.end(), machine) != instances.end();
}

}  // namespace

std::vector<std::string> KnowledgeBase::unavailable_services(const std::set<Iri>& fault_set) const {
  std::set<std::string> faulted_ids;
  for (const Iri& m : fault_set) {
    if (!is_machine_individual(*this, m))
      throw UnknownResourceError("unknown_resource: " + m.value);
    faulted_ids.insert(m.local_name());
  }

  std::set<std::string> out;
  auto services = match({{Var{"?svc"}, vocab::kHasUrl, Var{"?url"}}});
  for (const Binding& b : services) {
    const std::string url = to_string(b.at("?url"));
    auto parsed = util::parse_url(url);
    auto provider = util::query_value(parsed, "machine");
    if (provider && faulted_ids.count(*provider)) {
      out.insert(url);
      continue;
    }
    for (const ConditionBinding& c : conditions_of(url, ConditionRole::pre)) {
      if (!util::iequals(c.required_key, "state") || !util::iequals(c.required_value, "ready"))
        continue;
      auto checker = util::parse_url(c.checker_url);
      auto checked_machine = util::query_value(checker, "machine");
      if (checked_machine && faulted_ids.count(*checked_machine)) {
        out.insert(url);
        break;
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> KnowledgeBase::unavailable_services(const Iri& machine) const {
  return unavailable_services(std::set<Iri>{machine});
}

std::vector<Violation> KnowledgeBase::validate() const {
  std::vector<Violation> report;

  auto count_links = [&](const Iri& subject, const Iri& predicate) {
    int n = 0;
    auto it = by_subject_.find(subject);
    if (it == by_subject_.end()) return 0;
    for (std::size_t idx : it->second)
      if (triples_[idx].predicate == predicate) ++n;
    return n;
  };

  std::set<Iri> conditions;
  for (const Triple& t : triples_) {
    if (t.predicate == vocab::kHasPrecondition || t.predicate == vocab::kHasPostcondition) {
      if (const auto* iri = std::get_if<Iri>(&t.object)) conditions.insert(*iri);
    }
  }

  std::set<Iri> checkers;
  for (const Iri& c : conditions) {
    const int checked_by = count_links(c, vocab::kIsCheckedBy);
    if (checked_by != 1)
      report.push_back({"condition_checker_cardinality", c,
                        "expected exactly one isCheckedBy, found " + std::to_string(checked_by)});
    if (count_links(c, vocab::kRequiredKey) != 1)
      report.push_back({"condition_required_key_cardinality", c,
                        "expected exactly one requiredKeyInServiceResponse"});
    if (count_links(c, vocab::kRequiredValue) != 1)
      report.push_back({"condition_required_value_cardinality", c,
                        "expected exactly one requiredValueInServiceResponse"});
    auto it = by_subject_.find(c);
    if (it != by_subject_.end()) {
      for (std::size_t idx : it->second) {
        if (triples_[idx].predicate != vocab::kIsCheckedBy) continue;
        if (const auto* iri = std::get_if<Iri>(&triples_[idx].object)) checkers.insert(*iri);
      }
    }
  }

  for (const Iri& checker : checkers) {
    const int urls = count_links(checker, vocab::kHasUrl);
    if (urls != 1)
      report.push_back({"checker_without_url", checker,
                        "expected exactly one hasURL, found " + std::to_string(urls)});
    // Condition checks must be side-effect free: a checker with its own
    // preconditions is an actuation service and may not guard conditions.
    if (count_links(checker, vocab::kHasPrecondition) > 0)
      report.push_back({"checker_not_sensing", checker, "condition checker has preconditions"});
  }

  std::sort(report.begin(), report.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.kind, a.subject, a.detail) < std::tie(b.kind, b.subject, b.detail);
  });
  return report;
}

// --- serialization ------------------------------------------------------

namespace {

std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_literal(std::string_view s, int line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw ParseError(line, "dangling escape in literal");
    switch (s[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      default: throw ParseError(line, std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

std::string render_term(const Term& t) {
  if (const auto* iri = std::get_if<Iri>(&t)) return "<" + iri->value + ">";
  const Literal& lit = std::get<Literal>(t);
  return "\"" + escape_literal(lit.lexical) + "\"^^<" + std::string(datatype_iri(lit.datatype)) + ">";
}

Iri parse_iri_field(std::string_view field, int line) {
  if (field.size() < 3 || field.front() != '<' || field.back() != '>')
    throw ParseError(line, "expected <iri>, got: " + std::string(field));
  return Iri(std::string(field.substr(1, field.size() - 2)));
}

Term parse_term_field(std::string_view field, int line) {
  if (field.empty()) throw ParseError(line, "empty object field");
  if (field.front() == '<') return parse_iri_field(field, line);
  if (field.front() != '"') throw ParseError(line, "object must be <iri> or \"literal\"^^<datatype>");
  // Find the closing quote, honoring escapes.
  std::size_t end = std::string_view::npos;
  for (std::size_t i = 1; i < field.size(); ++i) {
    if (field[i] == '\\') {
      ++i;
      continue;
    }
    if (field[i] == '"') {
      end = i;
      break;
    }
  }
  if (end == std::string_view::npos) throw ParseError(line, "unterminated literal");
  const std::string lexical = unescape_literal(field.substr(1, end - 1), line);
  std::string_view rest = field.substr(end + 1);
  if (rest.substr(0, 2) != "^^") throw ParseError(line, "literal missing ^^<datatype>");
  Iri dt = parse_iri_field(rest.substr(2), line);
  LiteralType type;
  if (dt.value == kXsdString) type = LiteralType::string;
  else if (dt.value == kXsdBoolean) type = LiteralType::boolean;
  else if (dt.value == kXsdInteger) type = LiteralType::integer;
  else throw ParseError(line, "unsupported datatype: " + dt.value);
  Literal lit{lexical, type};
  try {
    lit.check();
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
  return lit;
}

}  // namespace

KnowledgeBase load_triples(std::string_view text) {
  std::vector<Triple> triples;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                          : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fields = util::split(line, '\t');
    if (fields.size() != 3)
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    try {
      Triple t;
      t.subject = parse_iri_field(fields[0], line_no);
      t.predicate = parse_iri_field(fields[1], line_no);
      t.object = parse_term_field(fields[2], line_no);
      triples.push_back(std::move(t));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return KnowledgeBase(std::move(triples));
}

std::string dump_triples(const KnowledgeBase& kb) {
  std::string out;
  for (const Triple& t : kb.triples()) {
    out += "<" + t.subject.value + ">\t<" + t.predicate.value + ">\t" + render_term(t.object) + "\n";
  }
  return out;
}

std::string render_individual(const KnowledgeBase& kb, const Iri& service) {
  auto objects_of = [&](const Iri& predicate) {
    std::vector<Term> out;
    for (const Binding& b : kb.match({{service, predicate, Var{"?o"}}})) out.push_back(b.at("?o"));
    return out;
  };

  std::ostringstream os;
  os << "<owl:NamedIndividual rdf:about=\"" << service.value << "\">\n";
  for (const Term& t : objects_of(vocab::kType))
    os << "  <rdf:type rdf:resource=\"" << to_string(t) << "\"/>\n";
  for (const Term& t : objects_of(vocab::kHasDescription))
    os << "  <FTOnto:hasDescription rdf:resource=\"" << to_string(t) << "\"/>\n";
  for (const Term& t : objects_of(vocab::kHasPrecondition))
    os << "  <FTOnto:hasPrecondition rdf:resource=\"" << to_string(t) << "\"/>\n";
  for (const Term& t : objects_of(vocab::kHasPostcondition))
    os << "  <FTOnto:hasPostcondition rdf:resource=\"" << to_string(t) << "\"/>\n";
  for (const Term& t : objects_of(vocab::kHasUrl))
    os << "  <FTOnto:hasURL rdf:datatype=\"" << kXsdString << "\">" << to_string(t)
       << "</FTOnto:hasURL>\n";
  os << "</owl:NamedIndividual>\n";
  return os.str();
}

}  // namespace ftfloor
