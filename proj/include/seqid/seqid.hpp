#pragma once

#include "seqid/numeric.hpp"
#include "seqid/random.hpp"
#include "seqid/expfam.hpp"
#include "seqid/thresholds.hpp"
#include "seqid/confseq.hpp"
#include "seqid/identify.hpp"
