#pragma once

#include "hyfermi/fock/basis.hpp"
#include "hyfermi/fock/demo.hpp"
#include "hyfermi/fock/generators.hpp"
#include "hyfermi/fock/hamiltonian.hpp"
#include "hyfermi/fock/lattice.hpp"
#include "hyfermi/fock/linalg.hpp"
#include "hyfermi/fock/trial.hpp"
