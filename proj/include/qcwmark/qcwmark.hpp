#pragma once

// Umbrella header for the quantum-circuit generative-model watermarking
// library: keyed watermark embedding into Gaussian starting latents,
// circuit encoding/decoding, structural attacks, and detection with
// synchronization restoration.

#include "qcwmark/attacks.hpp"
#include "qcwmark/bitseq.hpp"
#include "qcwmark/chacha.hpp"
#include "qcwmark/circuit.hpp"
#include "qcwmark/codec.hpp"
#include "qcwmark/diffusion.hpp"
#include "qcwmark/errors.hpp"
#include "qcwmark/harness.hpp"
#include "qcwmark/latent.hpp"
#include "qcwmark/plot.hpp"
#include "qcwmark/rng.hpp"
#include "qcwmark/simulator.hpp"
#include "qcwmark/srm.hpp"
#include "qcwmark/watermark.hpp"
