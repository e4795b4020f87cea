"""Benchmark toolkit for classical image-forgery detectors.

Five hand-crafted feature extractors, an SMO-trained kernel SVM, dataset
manifests, a synthetic forgery corpus generator and the same-dataset,
cross-dataset and in-the-wild evaluation protocols.
"""

__version__ = "0.1.0"
