# Conversation building and response parsing
