from nsdde.model.registry.loader import RegisteredModel, build_model, describe_model, list_models, load

__all__ = ["RegisteredModel", "build_model", "describe_model", "list_models", "load"]
