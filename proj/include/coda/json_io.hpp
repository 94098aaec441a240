#pragma once

// JSON views of kernel data, shared by trace files, the CLI and the service.

#include "coda/kernel.hpp"

#include "json.hpp"

namespace coda {

using Json = nlohmann::json;

Json record_to_json(const EventRecord& r);
EventRecord record_from_json(const Json& j); // throws Error("FormatError")

// current_time, connectors (pending entries), wake queues, machines, variables.
Json state_to_json(const Kernel& k, const RuntimeState& s);
// Enabled event with kind letter and the facts that enable it.
Json event_to_json(const Kernel& k, const RuntimeState& s, const Event& e);

} // namespace coda
