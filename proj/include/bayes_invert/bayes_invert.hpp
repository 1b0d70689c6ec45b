#ifndef BAYES_INVERT_BAYES_INVERT_HPP
#define BAYES_INVERT_BAYES_INVERT_HPP

#include "core.hpp"
#include "likelihood.hpp"
#include "atais.hpp"
#include "posterior.hpp"
#include "minibatch.hpp"
#include "mcmc.hpp"
#include "ilis.hpp"
#include "models.hpp"
#include "experiment.hpp"
#include "report.hpp"

#endif  // BAYES_INVERT_BAYES_INVERT_HPP
