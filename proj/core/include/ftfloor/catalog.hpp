#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ftfloor/kb.hpp"
#include "ftfloor/topology.hpp"

namespace ftfloor {

enum class ServiceKind { actuation, sensing };

struct ServiceDescription {
  Iri iri;
  std::string base_name;  // camelCase as catalogued, e.g. "pickUpAndTransport"
  std::string provider;   // machine id
  ServiceKind kind = ServiceKind::actuation;
  std::vector<std::pair<std::string, std::string>> parameters;  // ordered, machine first
  std::string url;
  std::vector<ConditionBinding> preconditions;   // sorted by condition IRI
  std::vector<ConditionBinding> postconditions;  // sorted by condition IRI
  std::set<std::string> required_resources;      // machine ids
  double nominal_duration = 0;                   // simulated seconds
};

struct BaseServiceEntry {
  std::string name;  // camelCase
  MachineKind machine_kind{};
  ServiceKind service_kind = ServiceKind::actuation;
  int expansions_per_machine = 0;
};

class ServiceCatalog {
 public:
  ServiceCatalog(Topology topology, std::map<std::string, ServiceDescription> services,
                 std::vector<BaseServiceEntry> base_services)
      : topology_(std::move(topology)),
        services_(std::move(services)),
        base_services_(std::move(base_services)) {}

  const Topology& topology() const { return topology_; }
  const std::map<std::string, ServiceDescription>& services() const { return services_; }
  const std::vector<BaseServiceEntry>& base_services() const { return base_services_; }

  // Canonicalizes the query (machine first, then grid order; stray runtime
  // parameters such as `speed` ignored) before the exact-match lookup.
  const ServiceDescription* lookup(const std::string& url) const;

 private:
  Topology topology_;
  std::map<std::string, ServiceDescription> services_;
  std::vector<BaseServiceEntry> base_services_;
};

ServiceCatalog generate(const Topology& topology,
                        const std::map<std::string, double>& duration_overrides = {});

std::string service_url(const std::string& host, const std::string& prefix,
                        const std::string& base_snake,
                        const std::vector<std::pair<std::string, std::string>>& parameters);

std::vector<Triple> as_triples(const ServiceCatalog& catalog);

// Per-machine block listing with bracketed expansion counts plus totals footer.
std::string counts_table(const ServiceCatalog& catalog);

}  // namespace ftfloor
