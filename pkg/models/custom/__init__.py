# Custom model files placed here are picked up by ModelManager.load_custom_models()
