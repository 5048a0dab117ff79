# cylgreen package
