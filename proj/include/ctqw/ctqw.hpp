#ifndef CTQW_CTQW_HPP
#define CTQW_CTQW_HPP

#include "amplitude_field.hpp"
#include "closed_form.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "laplace_oracle.hpp"
#include "lattice_hamiltonian.hpp"
#include "propagator.hpp"

#endif // CTQW_CTQW_HPP
