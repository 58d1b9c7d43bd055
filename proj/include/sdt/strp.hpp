#pragma once

#include "sdt/core.hpp"
#include "sdt/partition.hpp"

namespace sdt {

class InvalidScheme : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Store Resource Partition: empties the pipeline by flush or drain, then
// installs every limit of `scheme` at once. Throws InvalidScheme, leaving the
// core untouched, if the scheme does not fit the core.
RepartitionReceipt apply_strp(Core& core, const PartitionScheme& scheme, RepartitionMode mode);

// Same, changing only one structure's limits.
RepartitionReceipt apply_strp(Core& core, StructureKind kind, ThreadLimits limits, RepartitionMode mode);

}  // namespace sdt
