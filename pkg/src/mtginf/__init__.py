"""Service-time inference for M_t/G/infinity queues from queue-length paths."""
__version__ = "0.1.0"
