#pragma once

#include "nga/basis.hpp"
#include "nga/correlation.hpp"
#include "nga/dense.hpp"
#include "nga/error.hpp"
#include "nga/fourier.hpp"
#include "nga/game.hpp"
#include "nga/game_verifier.hpp"
#include "nga/mes_spec.hpp"
#include "nga/operator_io.hpp"
#include "nga/prg.hpp"
#include "nga/prover_tools.hpp"
#include "nga/psd_tester.hpp"
#include "nga/summation.hpp"
#include "nga/validation.hpp"
