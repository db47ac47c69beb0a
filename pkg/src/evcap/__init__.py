"""Event-camera stream toolkit.

Converts raw event recordings into red-blue frame bundles (temporal levels
plus adaptive spatial tiles), exercises the multimodal alignment losses at
toy scale with gradient verification, and drives a caption annotation
pipeline with human QA and a review service.
"""

__version__ = "0.1.0"
