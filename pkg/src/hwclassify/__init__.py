"""hwclassify: synthesize handwriting images and classify their structure.

Subpackages and modules:
  strokegen  stroke-based handwriting synthesis and text generation
  printgen   printed-text rendering from a bitmap font
  dataset    corpus assembly, manifests, splits, preprocessing
  model      residual CNN with hand-rolled gradients and Adam
  classify   embedding-space classification strategies
  evaluate   metrics, confusion matrices, PCA projections, reports
  pipeline   end-to-end experiment orchestration
  cli        command-line entry point
"""

__version__ = "0.1.0"
