#pragma once

// Umbrella header: deterministic discrete-event simulation of Paxos
// deployments under load and member failures.

#include "paxsim/arch.hpp"
#include "paxsim/arch_libpaxos.hpp"
#include "paxsim/arch_openreplica.hpp"
#include "paxsim/arch_ringpaxos.hpp"
#include "paxsim/arch_spaxos.hpp"
#include "paxsim/clients.hpp"
#include "paxsim/csv.hpp"
#include "paxsim/errors.hpp"
#include "paxsim/events.hpp"
#include "paxsim/message.hpp"
#include "paxsim/metrics.hpp"
#include "paxsim/network.hpp"
#include "paxsim/paxos.hpp"
#include "paxsim/presets.hpp"
#include "paxsim/rng.hpp"
#include "paxsim/runner.hpp"
#include "paxsim/scenario.hpp"
#include "paxsim/sim.hpp"
#include "paxsim/steering.hpp"
#include "paxsim/time.hpp"
#include "paxsim/topology.hpp"
