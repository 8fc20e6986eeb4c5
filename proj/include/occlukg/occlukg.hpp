#pragma once

#include "occlukg/adam.hpp"
#include "occlukg/bayes.hpp"
#include "occlukg/calibration.hpp"
#include "occlukg/complex_model.hpp"
#include "occlukg/config_file.hpp"
#include "occlukg/error.hpp"
#include "occlukg/experiment.hpp"
#include "occlukg/knowledge_graph.hpp"
#include "occlukg/loss.hpp"
#include "occlukg/ontology.hpp"
#include "occlukg/ranking.hpp"
#include "occlukg/sampling.hpp"
#include "occlukg/scene.hpp"
#include "occlukg/scene_xml.hpp"
#include "occlukg/split.hpp"
#include "occlukg/synthetic.hpp"
#include "occlukg/trainer.hpp"
