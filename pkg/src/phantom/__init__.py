from .generator import PhantomSpec, generate_labels, generate_subject, texture_field, write_dataset

__all__ = ["PhantomSpec", "generate_labels", "generate_subject", "texture_field", "write_dataset"]
