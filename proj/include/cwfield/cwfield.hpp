#ifndef CWFIELD_CWFIELD_HPP
#define CWFIELD_CWFIELD_HPP

#include "cwfield/config.hpp"
#include "cwfield/csv.hpp"
#include "cwfield/diophantine.hpp"
#include "cwfield/distribution.hpp"
#include "cwfield/dynsys.hpp"
#include "cwfield/errors.hpp"
#include "cwfield/field_distribution.hpp"
#include "cwfield/freeenergy.hpp"
#include "cwfield/jet.hpp"
#include "cwfield/law_io.hpp"
#include "cwfield/quadrature.hpp"

#endif  // CWFIELD_CWFIELD_HPP
